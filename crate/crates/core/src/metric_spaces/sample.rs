use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::ledger::material_of;
use super::FiniteMetricSpace;
use crate::error::{LabError, Result};
use crate::geometry::{MeridianPoint, MeridianSurface, WarpedProfile};

/// Triangle-inequality slack of sampled spaces, relative to the pole-to-pole
/// length of the profile.
pub const SAMPLE_TOL: f64 = 1e-6;

/// A finite sample of a geodesic ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledBall {
    /// Point 0 is the center and the base point.
    pub space: FiniteMetricSpace,
    /// The sample points in material coordinates, for following them along
    /// a flow.
    pub material: Vec<MeridianPoint>,
    /// Fewer than the requested points fit in the ball.
    pub reduced: bool,
    /// Pairs whose distance needed the graph fallback.
    pub fallbacks: usize,
}

/// Deterministic stratified sample of `k` points of `B(center, radius)` on
/// the meridian 2-sphere, with the center as base point.
///
/// Candidates lie on a lattice in `(arclength, angle)` around the center;
/// those inside the ball are taken at evenly spaced lattice positions.
pub fn sample_ball(profile: &WarpedProfile, center: MeridianPoint, radius: f64, k: usize) -> Result<SampledBall> {
    profile.validate()?;
    if k == 0 {
        return Err(LabError::Refused("sample size must be at least 1".into()));
    }
    if !(radius > 0.0) {
        return Err(LabError::Refused(format!("ball radius must be positive, got {radius}")));
    }
    let surface = MeridianSurface::new(profile);
    let total = surface.length();
    let sc = surface.s_of_x(center.x);

    let mut candidates = Vec::new();
    if k > 1 {
        let m = (2 * k).max(8);
        let (lo, hi) = ((sc - radius).max(0.0), (sc + radius).min(total));
        for i in 0..=2 * m {
            let s = lo + (hi - lo) * i as f64 / (2 * m) as f64;
            let on_pole = surface.psi_at(s) <= 0.0;
            for j in 0..2 * m {
                let theta = -PI + PI * j as f64 / m as f64;
                if on_pole && j > 0 {
                    break;
                }
                let d = surface.distance_s(sc, s, theta.abs()).length;
                if d <= radius && d > 1e-9 * total {
                    candidates.push(MeridianPoint::new(surface.x_of_s(s), center.angle + theta));
                }
            }
        }
    }
    let wanted = k - 1;
    let reduced = candidates.len() < wanted;
    let chosen: Vec<MeridianPoint> = if reduced {
        candidates
    } else {
        (0..wanted)
            .map(|j| candidates[((j as f64 + 0.5) * candidates.len() as f64 / wanted as f64) as usize])
            .collect()
    };
    let mut points = vec![center];
    points.extend(chosen);

    let (space, fallbacks) = space_on(&surface, &points, 0, SAMPLE_TOL * total)?;
    let material = points
        .iter()
        .map(|p| MeridianPoint::new(material_of(profile, p.x), p.angle))
        .collect();
    Ok(SampledBall {
        space,
        material,
        reduced,
        fallbacks,
    })
}

impl FiniteMetricSpace {
    /// Pairwise meridian distances between the given points of a profile.
    pub fn from_points(profile: &WarpedProfile, points: &[MeridianPoint], base: usize) -> Result<Self> {
        profile.validate()?;
        let surface = MeridianSurface::new(profile);
        Ok(space_on(&surface, points, base, SAMPLE_TOL * surface.length())?.0)
    }
}

fn space_on(surface: &MeridianSurface, points: &[MeridianPoint], base: usize, tol: f64) -> Result<(FiniteMetricSpace, usize)> {
    let k = points.len();
    let mut dist = vec![vec![0.0; k]; k];
    let mut fallbacks = 0;
    for i in 0..k {
        for j in i + 1..k {
            let d = surface.distance(points[i], points[j]);
            fallbacks += usize::from(d.reduced_accuracy());
            dist[i][j] = d.length;
            dist[j][i] = d.length;
        }
    }
    let mut space = FiniteMetricSpace::with_tolerance(dist, base, tol)?;
    space.points = Some(points.to_vec());
    Ok((space, fallbacks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::round_sphere;

    #[test]
    fn single_point() {
        let p = round_sphere(3, 1.0, 100);
        let b = sample_ball(&p, MeridianPoint::new(0.5, 0.0), 0.5, 1).unwrap();
        assert_eq!(b.space.dist, vec![vec![0.0]]);
        assert!(!b.reduced);
    }

    #[test]
    fn whole_sphere_sample() {
        let p = round_sphere(3, 1.0, 200);
        let b = sample_ball(&p, MeridianPoint::new(0.3, 0.0), PI, 20).unwrap();
        assert_eq!(b.space.len(), 20);
        assert!(b.space.diameter() <= PI + 1e-3);
        assert_eq!(b.space.base, 0);
        let again = sample_ball(&p, MeridianPoint::new(0.3, 0.0), PI, 20).unwrap();
        assert_eq!(b, again);
    }

    #[test]
    fn small_ball_stays_inside() {
        let p = round_sphere(3, 1.0, 200);
        let b = sample_ball(&p, MeridianPoint::new(0.5, 0.2), 0.3, 12).unwrap();
        for d in &b.space.dist[0] {
            assert!(*d <= 0.3 + 1e-9);
        }
        for (m, q) in b.material.iter().zip(b.space.points.as_ref().unwrap()) {
            assert!((m.x - q.x).abs() < 1e-12);
        }
    }
}
