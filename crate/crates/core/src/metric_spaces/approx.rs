use serde::{Deserialize, Serialize};

use super::FiniteMetricSpace;
use crate::error::{LabError, Result};

/// The three conditions of an ε-approximation, evaluated on finite samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxReport {
    pub eps: f64,
    /// `d(φ(x₀), y₀) < ε`.
    pub base_point: bool,
    /// Every sample point of `B(y₀, 1/ε)` lies within `ε` of the image of
    /// `B(x₀, 1/ε)`.
    pub covering: bool,
    /// `|d(x₁,x₂) − d(φx₁,φx₂)| < ε` on `B(x₀, 1/ε)`.
    pub distortion: bool,
    /// Largest distortion seen on the ball.
    pub max_distortion: f64,
    pub verdict: bool,
}

/// Evaluates whether `map` (indices into `y`, one per point of `x`) is an
/// ε-approximation of the pointed spaces. Balls `B(·, 1/ε)` are read inside
/// the samples: the points whose distance to the base point is below `1/ε`.
pub fn check_eps_approx(map: &[usize], x: &FiniteMetricSpace, y: &FiniteMetricSpace, eps: f64) -> Result<ApproxReport> {
    if map.len() != x.len() {
        return Err(LabError::InvalidCorrespondence(format!(
            "map has {} entries for {} points",
            map.len(),
            x.len()
        )));
    }
    if let Some(&b) = map.iter().find(|&&b| b >= y.len()) {
        return Err(LabError::InvalidCorrespondence(format!("map value {b} out of range")));
    }
    if !(eps > 0.0) {
        return Err(LabError::Refused(format!("eps must be positive, got {eps}")));
    }
    let radius = 1.0 / eps;
    let ball_x: Vec<usize> = (0..x.len()).filter(|&i| x.dist[x.base][i] < radius).collect();
    let base_point = y.dist[map[x.base]][y.base] < eps;
    let covering = (0..y.len())
        .filter(|&j| y.dist[y.base][j] < radius)
        .all(|j| ball_x.iter().any(|&i| y.dist[j][map[i]] < eps));
    let mut max_distortion: f64 = 0.0;
    for &i in &ball_x {
        for &k in &ball_x {
            max_distortion = max_distortion.max((x.dist[i][k] - y.dist[map[i]][map[k]]).abs());
        }
    }
    let distortion = max_distortion < eps;
    Ok(ApproxReport {
        eps,
        base_point,
        covering,
        distortion,
        max_distortion,
        verdict: base_point && covering && distortion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_an_approximation() {
        let x = FiniteMetricSpace::line(&[0.0, 0.4, 2.5]).unwrap();
        for eps in [1e-6, 0.1, 3.0] {
            assert!(check_eps_approx(&[0, 1, 2], &x, &x, eps).unwrap().verdict);
        }
    }

    #[test]
    fn collapsing_map_fails_distortion() {
        let x = FiniteMetricSpace::line(&[0.0, 0.5, 1.0]).unwrap();
        let y = FiniteMetricSpace::line(&[0.0, 1.0]).unwrap();
        let r = check_eps_approx(&[0, 0, 0], &x, &y, 0.1).unwrap();
        assert!(!r.verdict);
        assert!(!r.distortion);
        assert_eq!(r.max_distortion, 1.0);
        assert!(r.base_point);
        assert!(!r.covering);
    }

    #[test]
    fn bad_maps_rejected() {
        let x = FiniteMetricSpace::line(&[0.0, 1.0]).unwrap();
        assert!(check_eps_approx(&[0], &x, &x, 0.1).is_err());
        assert!(check_eps_approx(&[0, 3], &x, &x, 0.1).is_err());
        assert!(check_eps_approx(&[0, 1], &x, &x, 0.0).is_err());
    }
}
