//! Scenario files: TOML with a versioned `schema` key.
//!
//! ```toml
//! schema = 1
//! dimension = 3
//! family = "dumbbell"     # or "round_sphere"
//! neck = 0.2              # dumbbell: neck (required), bump, center, width
//! grid_n = 400
//! stop_q_ratio = 1e4
//! pairs = [[0.1, 0.0, 0.9, 0.0]]
//! ```

use std::path::Path;

use rflab_core::flow::{DumbbellParams, InitialFamily, Scenario};
use rflab_core::functionals::DEFAULT_LAMBDAS;
use rflab_core::metric_spaces::BRUTE_FORCE_MAX;
use rflab_core::{LabError, MeridianPoint};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub const DEFAULT_GH_SAMPLE_K: usize = 5;
pub const DEFAULT_PROFILE_STRIDE: usize = 10;

/// Scenario file as written. Every optional key has a documented default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema: u32,
    pub dimension: usize,
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neck: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bump: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_q_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptive_grid: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gh_sample_k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<[f64; 4]>>,
}

/// A validated scenario with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolved {
    pub scenario: Scenario,
    /// Every this many snapshots a full profile is written.
    pub profile_stride: usize,
    pub lambda_list: Vec<f64>,
    pub gh_sample_k: usize,
    /// Material point pairs `(x_a, angle_a, x_b, angle_b)` for the ledger.
    pub pairs: Vec<[f64; 4]>,
}

impl Resolved {
    pub fn meridian_pairs(&self) -> Vec<(MeridianPoint, MeridianPoint)> {
        self.pairs
            .iter()
            .map(|p| (MeridianPoint::new(p[0], p[1]), MeridianPoint::new(p[2], p[3])))
            .collect()
    }
}

/// Ledger pairs used when a scenario lists none: pole to pole, two points
/// across the middle, and two points on one orbit sphere.
pub fn default_pairs() -> Vec<[f64; 4]> {
    vec![
        [0.0, 0.0, 1.0, 0.0],
        [0.25, 0.0, 0.75, 0.0],
        [0.45, 0.0, 0.55, 0.0],
        [0.3, 0.0, 0.3, 1.0],
    ]
}

fn bad(key: &str, reason: impl Into<String>) -> CliError {
    CliError::Usage(format!("invalid scenario key `{key}`: {}", reason.into()))
}

pub fn parse_scenario(path: &Path) -> Result<Resolved, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read scenario {}: {e}", path.display())))?;
    parse_scenario_str(&text)
}

pub fn parse_scenario_str(text: &str) -> Result<Resolved, CliError> {
    let file: ScenarioFile =
        toml::from_str(text).map_err(|e| CliError::Usage(format!("scenario: {}", e.message())))?;
    file.resolve()
}

impl ScenarioFile {
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        if self.schema != SCHEMA_VERSION {
            return Err(bad(
                "schema",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema),
            ));
        }
        let family = match self.family.as_str() {
            "round_sphere" => {
                for (key, v) in [("neck", self.neck), ("bump", self.bump), ("center", self.center), ("width", self.width)] {
                    if v.is_some() {
                        return Err(bad(key, "only applies to the dumbbell family"));
                    }
                }
                let radius = self.radius.ok_or_else(|| bad("radius", "required for round_sphere"))?;
                InitialFamily::RoundSphere { radius }
            }
            "dumbbell" => {
                if self.radius.is_some() {
                    return Err(bad("radius", "only applies to the round_sphere family"));
                }
                let d = DumbbellParams::default();
                InitialFamily::Dumbbell(DumbbellParams {
                    neck: self.neck.ok_or_else(|| bad("neck", "required for dumbbell"))?,
                    bump: self.bump.unwrap_or(d.bump),
                    center: self.center.unwrap_or(d.center),
                    width: self.width.unwrap_or(d.width),
                })
            }
            other => return Err(bad("family", format!("unknown family {other:?}"))),
        };
        let mut scenario = Scenario::new(self.dimension, family);
        scenario.grid_n = self.grid_n.unwrap_or(scenario.grid_n);
        scenario.cfl = self.cfl.unwrap_or(scenario.cfl);
        scenario.stop_q_ratio = self.stop_q_ratio.unwrap_or(scenario.stop_q_ratio);
        scenario.max_steps = self.max_steps.unwrap_or(scenario.max_steps);
        scenario.output_stride = self.output_stride.unwrap_or(scenario.output_stride);
        scenario.adaptive_grid = self.adaptive_grid.unwrap_or(scenario.adaptive_grid);
        scenario.validate().map_err(|e| match e {
            LabError::InvalidScenario { key, reason } => bad(&key, reason),
            other => CliError::Usage(other.to_string()),
        })?;
        // the dumbbell's slope bound is only known once the profile is built
        rflab_core::initial_profile(&scenario).map_err(|e| CliError::Usage(format!("scenario: {e}")))?;

        let profile_stride = self.profile_stride.unwrap_or(DEFAULT_PROFILE_STRIDE);
        if profile_stride == 0 {
            return Err(bad("profile_stride", "must be positive"));
        }
        let lambda_list = self.lambda_list.clone().unwrap_or_else(|| DEFAULT_LAMBDAS.to_vec());
        if lambda_list.is_empty() || lambda_list.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(bad("lambda_list", "must be a non-empty list of positive exponents"));
        }
        let gh_sample_k = self.gh_sample_k.unwrap_or(DEFAULT_GH_SAMPLE_K);
        if !(2..=BRUTE_FORCE_MAX).contains(&gh_sample_k) {
            return Err(bad("gh_sample_k", format!("must lie in 2..={BRUTE_FORCE_MAX}, got {gh_sample_k}")));
        }
        let pairs = self.pairs.clone().unwrap_or_else(default_pairs);
        for p in &pairs {
            if !(0.0..=1.0).contains(&p[0]) || !(0.0..=1.0).contains(&p[2]) || p.iter().any(|v| !v.is_finite()) {
                return Err(bad("pairs", format!("coordinates must lie in [0, 1], got {p:?}")));
            }
            if p[0] == p[2] && p[1] == p[3] {
                return Err(bad("pairs", format!("pair {p:?} has coincident points")));
            }
        }
        Ok(Resolved {
            scenario,
            profile_stride,
            lambda_list,
            gh_sample_k,
            pairs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_sphere_gets_defaults() {
        let r = parse_scenario_str("schema = 1\ndimension = 3\nfamily = \"round_sphere\"\nradius = 1\n").unwrap();
        assert_eq!(r.scenario.grid_n, 200);
        assert_eq!(r.scenario.cfl, 0.4);
        assert_eq!(r.scenario.stop_q_ratio, 100.0);
        assert_eq!(r.scenario.family, InitialFamily::RoundSphere { radius: 1.0 });
        assert_eq!(r.gh_sample_k, DEFAULT_GH_SAMPLE_K);
    }

    #[test]
    fn dumbbell_echoes_parameters() {
        let r = parse_scenario_str(
            "schema = 1\ndimension = 3\nfamily = \"dumbbell\"\nneck = 0.2\nbump = 1.0\ncenter = 0.5\nwidth = 0.2\n",
        )
        .unwrap();
        match r.scenario.family {
            InitialFamily::Dumbbell(p) => {
                assert_eq!(p.neck, 0.2);
                assert_eq!(p.width, 0.2);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn errors_name_the_key() {
        let cases = [
            ("schema = 1\ndimension = 3\nfamily = \"round_sphere\"\nradius = 1\ncfl = 1.5\n", "cfl"),
            ("schema = 1\ndimension = 3\nfamily = \"round_sphere\"\n", "radius"),
            ("schema = 1\ndimension = 3\nfamily = \"round_sphere\"\nradius = 1\nbogus = 2\n", "bogus"),
            ("schema = 2\ndimension = 3\nfamily = \"round_sphere\"\nradius = 1\n", "schema"),
            ("schema = 1\nfamily = \"round_sphere\"\nradius = 1\n", "dimension"),
            ("schema = 1\ndimension = 3\nfamily = \"dumbbell\"\nneck = 0.2\nradius = 1\n", "radius"),
            ("schema = 1\ndimension = 3\nfamily = \"dumbbell\"\nneck = 0.2\nwidth = 0.12\n", "dpsi/ds"),
            ("schema = 1\ndimension = 3\nfamily = \"round_sphere\"\nradius = 1\ngh_sample_k = 9\n", "gh_sample_k"),
        ];
        for (text, key) in cases {
            match parse_scenario_str(text) {
                Err(CliError::Usage(msg)) => assert!(msg.contains(key), "{msg} should mention {key}"),
                other => panic!("{text}: unexpected {other:?}"),
            }
        }
    }
}
