//! Rotationally symmetric Ricci flow.

mod initial;
mod integrator;
pub(crate) mod regrid;
mod scenario;
pub(crate) mod singular_time;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::{curvature, CurvatureField, WarpedProfile};

pub use initial::{dumbbell_profile, initial_profile, round_sphere_profile};
pub use integrator::{gauge_velocity, stable_dt, step};
pub use scenario::{DumbbellParams, InitialFamily, Scenario};
pub use singular_time::{estimate_singular_time, SingularTimeEstimate};

/// Halvings of `dt` tried after an overshoot before declaring breakdown.
pub const MAX_RETRIES: usize = 12;
/// A regrid fires once the resolution `max Δs·√|Rm|` has grown by this
/// factor since the last one.
pub const REGRID_FACTOR: f64 = 1.5;

/// How a run ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FlowStatus {
    /// `max_steps` reached without meeting the curvature stop ratio.
    Completed,
    /// `Q(t)` reached `stop_q_ratio·Q(0)`.
    SingularityApproached,
    Breakdown { reason: String },
}

/// Scalar diagnostics of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotFunctionals {
    pub t: f64,
    /// `sup|R|`.
    pub o: f64,
    /// `sup|Ric|`.
    pub p: f64,
    /// `sup|Rm|`.
    pub q: f64,
    /// `sup|Ric₋|`.
    pub p_minus: f64,
    pub diameter: f64,
    pub neck_radius: Option<f64>,
    /// Node where `|Rm|` peaks.
    pub argmax_rm: usize,
}

impl SnapshotFunctionals {
    pub fn of(profile: &WarpedProfile, field: &CurvatureField) -> Self {
        Self {
            t: profile.time,
            o: field.sup_scalar(),
            p: field.sup_ric(),
            q: field.sup_rm(),
            p_minus: field.sup_ric_minus(),
            diameter: profile.diameter(),
            neck_radius: profile.neck_radius(),
            argmax_rm: field.argmax_rm(),
        }
    }
}

/// Snapshots of a run, in increasing time.
///
/// `epochs[k]` counts the regrids before snapshot `k`; node-wise time
/// differences are only meaningful between snapshots of the same epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowTrace {
    pub times: Vec<f64>,
    pub profiles: Vec<WarpedProfile>,
    pub curvatures: Vec<CurvatureField>,
    pub functionals: Vec<SnapshotFunctionals>,
    pub epochs: Vec<u32>,
    pub status: FlowStatus,
    /// Accepted time steps.
    pub steps: usize,
}

impl FlowTrace {
    fn empty() -> Self {
        Self {
            times: Vec::new(),
            profiles: Vec::new(),
            curvatures: Vec::new(),
            functionals: Vec::new(),
            epochs: Vec::new(),
            status: FlowStatus::Completed,
            steps: 0,
        }
    }

    fn push(&mut self, profile: WarpedProfile, field: CurvatureField, epoch: u32) {
        self.times.push(profile.time);
        self.functionals.push(SnapshotFunctionals::of(&profile, &field));
        self.profiles.push(profile);
        self.curvatures.push(field);
        self.epochs.push(epoch);
    }

    /// Builds a trace from stored snapshots, recomputing curvature.
    pub fn from_snapshots(snapshots: Vec<(WarpedProfile, u32)>, status: FlowStatus) -> Result<Self> {
        let mut trace = Self::empty();
        trace.status = status;
        for (profile, epoch) in snapshots {
            if let Some(&t) = trace.times.last() {
                if !(profile.time > t) {
                    return Err(LabError::InvalidProfile(format!(
                        "snapshot times must increase strictly ({} after {t})",
                        profile.time
                    )));
                }
            }
            let field = curvature(&profile)?;
            trace.push(profile, field, epoch);
        }
        Ok(trace)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.profiles.first().map_or(0, |p| p.n)
    }

    /// The parabolically rescaled flow `c²g(t/c²)`.
    pub fn rescaled(&self, c: f64) -> Result<Self> {
        let snapshots = self
            .profiles
            .iter()
            .zip(&self.epochs)
            .map(|(p, &e)| (p.rescaled(c), e))
            .collect();
        let mut out = Self::from_snapshots(snapshots, self.status.clone())?;
        out.steps = self.steps;
        Ok(out)
    }

    pub fn q_series(&self) -> Vec<f64> {
        self.functionals.iter().map(|f| f.q).collect()
    }

    pub fn p_series(&self) -> Vec<f64> {
        self.functionals.iter().map(|f| f.p).collect()
    }
}

/// Integrates a scenario until the curvature stop ratio, `max_steps`, or a
/// numerical breakdown. Only an invalid scenario is an error; breakdowns are
/// recorded in the returned trace's status.
pub fn run(scenario: &Scenario) -> Result<FlowTrace> {
    let mut profile = initial_profile(scenario)?;
    let mut field = curvature(&profile)?;
    let target = scenario.stop_q_ratio * field.sup_rm();
    let mut trace = FlowTrace::empty();
    let mut epoch = 0u32;
    let mut reference = regrid::resolution(&profile, &field.norm_rm);
    trace.push(profile.clone(), field, epoch);

    let breakdown = |trace: &mut FlowTrace, reason: String| {
        trace.status = FlowStatus::Breakdown { reason };
    };

    loop {
        if trace.steps >= scenario.max_steps {
            trace.status = FlowStatus::Completed;
            break;
        }
        let mut dt = stable_dt(&profile, scenario.cfl);
        let mut outcome = step(&profile, dt);
        let mut retries = 0;
        while outcome.is_err() && retries < MAX_RETRIES {
            dt *= 0.5;
            retries += 1;
            outcome = step(&profile, dt);
        }
        profile = match outcome {
            Ok(p) => p,
            Err(e) => {
                breakdown(&mut trace, format!("at t = {}: {e}", profile.time));
                break;
            }
        };
        trace.steps += 1;
        field = match curvature(&profile) {
            Ok(f) => f,
            Err(e) => {
                breakdown(&mut trace, format!("at t = {}: {e}", profile.time));
                break;
            }
        };
        if field.sup_rm() >= target {
            trace.push(profile, field, epoch);
            trace.status = FlowStatus::SingularityApproached;
            break;
        }
        if scenario.adaptive_grid && regrid::resolution(&profile, &field.norm_rm) > REGRID_FACTOR * reference {
            let moved = regrid::regrid(&profile, &field.norm_rm);
            let moved_field = match moved.validate().and_then(|_| curvature(&moved)) {
                Ok(f) => f,
                Err(e) => {
                    breakdown(&mut trace, format!("regrid at t = {}: {e}", profile.time));
                    break;
                }
            };
            profile = moved;
            field = moved_field;
            epoch += 1;
            reference = regrid::resolution(&profile, &field.norm_rm);
        }
        if trace.steps % scenario.output_stride == 0 {
            trace.push(profile.clone(), field, epoch);
        }
    }
    Ok(trace)
}
