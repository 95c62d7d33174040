//! Finite metric spaces sampled from geodesic balls: Gromov–Hausdorff
//! bounds, exact small-instance GH distances, ε-approximations and the
//! distance-distortion ledger of a flow.

mod approx;
mod gh;
mod ledger;
mod sample;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::MeridianPoint;

pub use approx::{check_eps_approx, ApproxReport};
pub use gh::{gh_brute_force, gh_brute_force_pointed, gh_optimal, gh_upper_bound, GhSolution, BRUTE_FORCE_MAX};
pub use ledger::{consecutive_windows, distortion_ledger, nearest_snapshot, position_of_label, LedgerEntry, LEDGER_TOL};
pub use sample::{sample_ball, SampledBall};

/// Absolute slack allowed in the triangle inequality of an exact space.
pub const TRIANGLE_TOL: f64 = 1e-9;

/// A pointed finite metric space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMetricSpace {
    /// Meridian coordinates when the space was sampled from a profile.
    pub points: Option<Vec<MeridianPoint>>,
    pub dist: Vec<Vec<f64>>,
    pub base: usize,
    /// Extra slack allowed in the triangle inequality, for sampled spaces
    /// whose distances carry solver error.
    pub tolerance: f64,
}

impl FiniteMetricSpace {
    pub fn new(dist: Vec<Vec<f64>>, base: usize) -> Result<Self> {
        Self::with_tolerance(dist, base, 0.0)
    }

    /// Validates symmetry, zero diagonal, non-negativity and the triangle
    /// inequality within `TRIANGLE_TOL + tolerance`.
    pub fn with_tolerance(dist: Vec<Vec<f64>>, base: usize, tolerance: f64) -> Result<Self> {
        let k = dist.len();
        let bad = |why: String| Err(LabError::InvalidMetricSpace(why));
        if k == 0 {
            return bad("no points".into());
        }
        if base >= k {
            return bad(format!("base point {base} out of range for {k} points"));
        }
        for (i, row) in dist.iter().enumerate() {
            if row.len() != k {
                return bad(format!("row {i} has {} entries, expected {k}", row.len()));
            }
            if row[i] != 0.0 {
                return bad(format!("d({i},{i}) = {} is not zero", row[i]));
            }
            for (j, &d) in row.iter().enumerate() {
                if !(d >= 0.0) || !d.is_finite() {
                    return bad(format!("d({i},{j}) = {d} is not a finite non-negative number"));
                }
                if d != dist[j][i] {
                    return bad(format!("d({i},{j}) = {d} but d({j},{i}) = {}", dist[j][i]));
                }
            }
        }
        let slack = TRIANGLE_TOL + tolerance;
        for i in 0..k {
            for j in 0..k {
                for m in 0..k {
                    if dist[i][j] > dist[i][m] + dist[m][j] + slack {
                        return bad(format!("triangle inequality fails at ({i},{m},{j})"));
                    }
                }
            }
        }
        Ok(Self {
            points: None,
            dist,
            base,
            tolerance,
        })
    }

    /// Points of the real line with the first as base point.
    pub fn line(coords: &[f64]) -> Result<Self> {
        let dist = coords
            .iter()
            .map(|a| coords.iter().map(|b| (a - b).abs()).collect())
            .collect();
        Self::new(dist, 0)
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// All distances multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dist: self.dist.iter().map(|r| r.iter().map(|d| d * c).collect()).collect(),
            tolerance: self.tolerance * c,
            ..self.clone()
        }
    }
}

/// A relation between two finite spaces, given by index pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correspondence {
    pub pairs: Vec<(usize, usize)>,
}

impl Correspondence {
    pub fn new(pairs: Vec<(usize, usize)>) -> Self {
        Self { pairs }
    }

    /// `i ↔ i` on a space with `k` points.
    pub fn identity(k: usize) -> Self {
        Self::new((0..k).map(|i| (i, i)).collect())
    }

    /// Graph of a map `X → Y`; a correspondence only when the map is onto.
    pub fn from_map(map: &[usize]) -> Self {
        Self::new(map.iter().copied().enumerate().collect())
    }

    /// Checks that every point of both spaces is covered and every index is
    /// in range.
    pub fn validate(&self, nx: usize, ny: usize) -> Result<()> {
        let mut seen_x = vec![false; nx];
        let mut seen_y = vec![false; ny];
        for &(a, b) in &self.pairs {
            if a >= nx || b >= ny {
                return Err(LabError::InvalidCorrespondence(format!(
                    "pair ({a},{b}) out of range for sizes {nx}, {ny}"
                )));
            }
            seen_x[a] = true;
            seen_y[b] = true;
        }
        if let Some(a) = seen_x.iter().position(|s| !s) {
            return Err(LabError::InvalidCorrespondence(format!("point {a} of X is not covered")));
        }
        if let Some(b) = seen_y.iter().position(|s| !s) {
            return Err(LabError::InvalidCorrespondence(format!("point {b} of Y is not covered")));
        }
        Ok(())
    }
}
