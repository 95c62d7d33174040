use serde::{Deserialize, Serialize};

use super::{Correspondence, FiniteMetricSpace};
use crate::error::{LabError, Result};

/// Largest space size accepted by the exact solvers.
pub const BRUTE_FORCE_MAX: usize = 5;

/// `½·dis(R)`, an upper bound for the Gromov–Hausdorff distance.
pub fn gh_upper_bound(x: &FiniteMetricSpace, y: &FiniteMetricSpace, corr: &Correspondence) -> Result<f64> {
    corr.validate(x.len(), y.len())?;
    let mut dis: f64 = 0.0;
    for &(a1, b1) in &corr.pairs {
        for &(a2, b2) in &corr.pairs {
            dis = dis.max((x.dist[a1][a2] - y.dist[b1][b2]).abs());
        }
    }
    Ok(0.5 * dis)
}

/// An optimal correspondence and its value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhSolution {
    pub distance: f64,
    pub correspondence: Correspondence,
}

/// Exact `d_GH` of two spaces with at most [`BRUTE_FORCE_MAX`] points.
pub fn gh_brute_force(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Result<f64> {
    Ok(gh_optimal(x, y, false)?.distance)
}

/// Exact GH distance over correspondences that relate the two base points.
pub fn gh_brute_force_pointed(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Result<f64> {
    Ok(gh_optimal(x, y, true)?.distance)
}

/// Minimizes `½·dis(R)` over correspondences by branch and bound.
///
/// Distortion only grows when pairs are added, so it suffices to search
/// relations `graph(f) ∪ graph(g)ᵀ` for maps `f: X → Y`, `g: Y → X`: every
/// correspondence contains one of these. With `pointed`, the pair of base
/// points is forced into the relation.
pub fn gh_optimal(x: &FiniteMetricSpace, y: &FiniteMetricSpace, pointed: bool) -> Result<GhSolution> {
    let (nx, ny) = (x.len(), y.len());
    if nx > BRUTE_FORCE_MAX || ny > BRUTE_FORCE_MAX {
        return Err(LabError::Refused(format!(
            "exact GH enumerates correspondences only up to {BRUTE_FORCE_MAX} points, got {nx} and {ny}"
        )));
    }
    let mut search = Search {
        x,
        y,
        pairs: Vec::with_capacity(nx + ny + 1),
        best: f64::INFINITY,
        best_pairs: Vec::new(),
    };
    if pointed {
        search.pairs.push((x.base, y.base));
    }
    search.descend(0, 0.0);
    Ok(GhSolution {
        distance: 0.5 * search.best,
        correspondence: Correspondence::new(search.best_pairs),
    })
}

struct Search<'a> {
    x: &'a FiniteMetricSpace,
    y: &'a FiniteMetricSpace,
    pairs: Vec<(usize, usize)>,
    best: f64,
    best_pairs: Vec<(usize, usize)>,
}

impl Search<'_> {
    fn added_cost(&self, a: usize, b: usize) -> f64 {
        self.pairs
            .iter()
            .map(|&(a2, b2)| (self.x.dist[a][a2] - self.y.dist[b][b2]).abs())
            .fold(0.0, f64::max)
    }

    /// Slots `0..nx` pick `f(a)`, the remaining `ny` slots pick `g(b)`.
    fn descend(&mut self, slot: usize, cost: f64) {
        let (nx, ny) = (self.x.len(), self.y.len());
        if slot == nx + ny {
            if cost < self.best {
                self.best = cost;
                self.best_pairs = self.pairs.clone();
            }
            return;
        }
        let mut options: Vec<((usize, usize), f64)> = if slot < nx {
            (0..ny).map(|b| ((slot, b), self.added_cost(slot, b))).collect()
        } else {
            let b = slot - nx;
            (0..nx).map(|a| ((a, b), self.added_cost(a, b))).collect()
        };
        options.sort_by(|u, v| u.1.total_cmp(&v.1));
        for (pair, extra) in options {
            let next = cost.max(extra);
            if next >= self.best {
                break;
            }
            self.pairs.push(pair);
            self.descend(slot + 1, next);
            self.pairs.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(c: &[f64]) -> FiniteMetricSpace {
        FiniteMetricSpace::line(c).unwrap()
    }

    #[test]
    fn hand_example() {
        let x = line(&[0.0, 0.5, 1.0]);
        let y = line(&[0.0, 1.0]);
        let corr = Correspondence::new(vec![(0, 0), (1, 0), (2, 1)]);
        assert_eq!(gh_upper_bound(&x, &y, &corr).unwrap(), 0.25);
        assert_eq!(gh_brute_force(&x, &y).unwrap(), 0.25);
        assert_eq!(gh_brute_force(&y, &x).unwrap(), 0.25);
    }

    #[test]
    fn identity_and_scaling() {
        let x = line(&[0.0, 0.3, 1.1, 2.0]);
        assert_eq!(gh_upper_bound(&x, &x, &Correspondence::identity(4)).unwrap(), 0.0);
        assert_eq!(gh_brute_force(&x, &x).unwrap(), 0.0);
        let bound = gh_upper_bound(&x.scaled(1.5), &x, &Correspondence::identity(4)).unwrap();
        assert!((bound - 0.5 * 0.5 * 2.0).abs() < 1e-15);
    }

    #[test]
    fn two_point_spaces() {
        let d = gh_brute_force(&line(&[0.0, 0.7]), &line(&[0.0, 0.2])).unwrap();
        assert!((d - 0.25).abs() < 1e-15);
    }

    #[test]
    fn single_point_against_segment() {
        let d = gh_brute_force(&line(&[0.0]), &line(&[0.0, 2.0])).unwrap();
        assert_eq!(d, 1.0);
    }

    #[test]
    fn pointed_is_never_smaller() {
        let x = line(&[0.0, 1.0, 1.2]);
        let mut y = line(&[0.0, 0.2, 1.2]);
        y.base = 2;
        assert!(gh_brute_force_pointed(&x, &y).unwrap() >= gh_brute_force(&x, &y).unwrap());
    }

    #[test]
    fn refuses_large_spaces() {
        let big = line(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(gh_brute_force(&big, &big).is_err());
    }

    #[test]
    fn invalid_correspondence_is_rejected() {
        let x = line(&[0.0, 1.0]);
        assert!(gh_upper_bound(&x, &x, &Correspondence::new(vec![(0, 0)])).is_err());
    }
}
