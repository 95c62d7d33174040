use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Parameters of the bump–neck–bump family.
///
/// The profile is `ψ = b·sin(πx)·g(cos πx)` on `φ ≡ πb`, where `g ≡ 1` near
/// both poles and dips to `neck/(b·sin πc)` at `x = c`. Near the poles the
/// metric is exactly the round sphere of radius `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DumbbellParams {
    /// Orbit radius at the neck center.
    pub neck: f64,
    /// Radius `b` of the two round caps.
    pub bump: f64,
    /// Coordinate `c` of the neck center.
    pub center: f64,
    /// Width of the dent, in units of `u = cos πx` divided by `π`.
    pub width: f64,
}

impl Default for DumbbellParams {
    fn default() -> Self {
        Self {
            neck: 0.2,
            bump: 1.0,
            center: 0.5,
            width: 0.2,
        }
    }
}

/// Named initial metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum InitialFamily {
    RoundSphere { radius: f64 },
    Dumbbell(DumbbellParams),
}

/// Everything needed to reproduce one flow run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub n: usize,
    pub family: InitialFamily,
    /// Number of grid intervals `N`.
    pub grid_n: usize,
    /// `dt = cfl·Δs_min²/2` (smaller above `n = 4`, see [`crate::flow::stable_dt`]), with `cfl ∈ (0, 1)`.
    pub cfl: f64,
    /// Stop once `Q(t) ≥ stop_q_ratio·Q(0)`.
    pub stop_q_ratio: f64,
    pub max_steps: usize,
    /// Record a snapshot every this many steps.
    pub output_stride: usize,
    /// Redistribute nodes along the meridian when the neck outgrows the grid.
    pub adaptive_grid: bool,
}

impl Scenario {
    pub const DEFAULT_GRID_N: usize = 200;
    pub const DEFAULT_CFL: f64 = 0.4;
    pub const DEFAULT_STOP_Q_RATIO: f64 = 100.0;
    pub const DEFAULT_MAX_STEPS: usize = 2_000_000;
    pub const DEFAULT_OUTPUT_STRIDE: usize = 10;

    pub fn new(n: usize, family: InitialFamily) -> Self {
        Self {
            n,
            family,
            grid_n: Self::DEFAULT_GRID_N,
            cfl: Self::DEFAULT_CFL,
            stop_q_ratio: Self::DEFAULT_STOP_Q_RATIO,
            max_steps: Self::DEFAULT_MAX_STEPS,
            output_stride: Self::DEFAULT_OUTPUT_STRIDE,
            adaptive_grid: true,
        }
    }

    pub fn round_sphere(n: usize, radius: f64) -> Self {
        Self::new(n, InitialFamily::RoundSphere { radius })
    }

    pub fn dumbbell(n: usize, params: DumbbellParams) -> Self {
        Self::new(n, InitialFamily::Dumbbell(params))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: String| {
            Err(LabError::InvalidScenario {
                key: key.into(),
                reason,
            })
        };
        if self.n < 3 {
            return bad("dimension", format!("must be at least 3, got {}", self.n));
        }
        if self.grid_n < 50 {
            return bad("grid_n", format!("must be at least 50, got {}", self.grid_n));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return bad("cfl", format!("must lie in (0, 1), got {}", self.cfl));
        }
        if !(self.stop_q_ratio > 1.0 && self.stop_q_ratio.is_finite()) {
            return bad("stop_q_ratio", format!("must exceed 1, got {}", self.stop_q_ratio));
        }
        if self.output_stride == 0 {
            return bad("output_stride", "must be positive".into());
        }
        match self.family {
            InitialFamily::RoundSphere { radius } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return bad("radius", format!("must be positive, got {radius}"));
                }
            }
            InitialFamily::Dumbbell(p) => {
                if !(p.bump > 0.0 && p.bump.is_finite()) {
                    return bad("bump", format!("must be positive, got {}", p.bump));
                }
                if !(p.center > 0.0 && p.center < 1.0) {
                    return bad("center", format!("must lie in (0, 1), got {}", p.center));
                }
                if !(p.width > 0.0 && p.width.is_finite()) {
                    return bad("width", format!("must be positive, got {}", p.width));
                }
                let cap = p.bump * (std::f64::consts::PI * p.center).sin();
                if !(p.neck > 0.0 && p.neck < cap) {
                    return bad(
                        "neck",
                        format!("must lie in (0, {cap:.6}) for this bump and center, got {}", p.neck),
                    );
                }
            }
        }
        Ok(())
    }
}
