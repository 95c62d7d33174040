use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::geodesic::bisect;
use super::{MeridianPoint, MeridianSurface, WarpedProfile};
use crate::error::{LabError, Result};

/// Volume of a geodesic ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallVolume {
    pub volume: f64,
    /// The radius reached the diameter and the whole manifold was returned.
    pub saturated: bool,
}

/// Volume of the unit `k`-sphere, `ω_k`.
pub fn sphere_area(k: usize) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k - 1) as f64 * sphere_area(k - 2),
    }
}

/// `∫₀^θ sin^k`.
pub fn sublevel_sin_power(k: usize, theta: f64) -> f64 {
    match k {
        0 => theta,
        1 => 1.0 - theta.cos(),
        _ => {
            -theta.sin().powi(k as i32 - 1) * theta.cos() / k as f64
                + (k - 1) as f64 / k as f64 * sublevel_sin_power(k - 2, theta)
        }
    }
}

const QUAD_PANELS: usize = 128;

/// Volume of `B(center, radius)` by quadrature of
/// `φ ψ^{n−1} ω_{n−2} sin^{n−2}θ` over the sublevel set of the distance.
///
/// For each level `s` the angular extent of the ball is the `θ` where the
/// distance to `(s, θ)` reaches the radius; the level integral is then
/// closed-form in `θ`. The outer integral uses Simpson's rule after the
/// substitution `s = mid − half·cos u`, which absorbs the square-root
/// behaviour at the two ends of the ball.
pub fn ball_volume(profile: &WarpedProfile, center: MeridianPoint, radius: f64) -> Result<BallVolume> {
    profile.validate()?;
    if !(radius > 0.0) {
        return Err(LabError::Refused(format!("ball radius must be positive, got {radius}")));
    }
    let surface = MeridianSurface::new(profile);
    Ok(ball_volume_on(&surface, profile.n, surface.s_of_x(center.x), radius))
}

pub(crate) fn ball_volume_on(surface: &MeridianSurface, n: usize, sc: f64, radius: f64) -> BallVolume {
    let total_len = surface.length();
    let e = (n - 1) as i32;
    if radius >= total_len {
        let full = integrate_levels(0.0, total_len, |s| surface.psi_at(s).powi(e));
        return BallVolume {
            volume: sphere_area(n - 2) * sublevel_sin_power(n - 2, PI) * full,
            saturated: true,
        };
    }
    let lo = (sc - radius).max(0.0);
    let hi = (sc + radius).min(total_len);
    let level = |s: f64| -> f64 {
        let psi = surface.psi_at(s);
        if psi <= 0.0 {
            return 0.0;
        }
        let excess = |theta: f64| {
            let d = surface.distance_capped(sc, s, theta, radius);
            if d.is_finite() {
                d - radius
            } else {
                radius
            }
        };
        let theta_max = if excess(PI) <= 0.0 {
            PI
        } else if excess(0.0) > 0.0 {
            0.0
        } else {
            bisect(0.0, PI, excess)
        };
        psi.powi(e) * sublevel_sin_power(n - 2, theta_max)
    };
    BallVolume {
        volume: sphere_area(n - 2) * integrate_levels(lo, hi, level),
        saturated: false,
    }
}

fn integrate_levels(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let du = PI / QUAD_PANELS as f64;
    let g = |u: f64| f(mid - half * u.cos()) * half * u.sin();
    let mut acc = g(0.0) + g(PI);
    for k in 1..QUAD_PANELS {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * g(k as f64 * du);
    }
    acc * du / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::round_sphere;

    #[test]
    fn unit_sphere_areas() {
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-12);
        assert!((sphere_area(3) - 2.0 * PI * PI).abs() < 1e-12);
        assert!((sublevel_sin_power(2, PI) - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn whole_three_sphere() {
        let p = round_sphere(3, 1.0, 200);
        let v = ball_volume(&p, MeridianPoint::new(0.3, 0.0), PI).unwrap();
        assert!(v.saturated);
        assert!((v.volume - 2.0 * PI * PI).abs() < 0.01 * 2.0 * PI * PI);
    }

    #[test]
    fn spherical_caps() {
        let p = round_sphere(3, 1.0, 200);
        for (x, rho) in [(0.5, 0.3), (0.37, 0.537), (0.1, 0.6), (0.0, 0.4), (0.8, 1.2)] {
            let v = ball_volume(&p, MeridianPoint::new(x, 0.0), rho).unwrap();
            let exact = 2.0 * PI * (rho - rho.sin() * rho.cos());
            assert!(!v.saturated);
            assert!((v.volume - exact).abs() < 0.01 * exact, "x={x} rho={rho}: {} vs {exact}", v.volume);
        }
    }

    #[test]
    fn euclidean_limit() {
        let p = round_sphere(3, 1.0, 400);
        let rho = 0.05;
        let v = ball_volume(&p, MeridianPoint::new(0.5, 0.0), rho).unwrap();
        let ratio = v.volume / rho.powi(3);
        assert!((ratio - 4.0 * PI / 3.0).abs() < 0.01 * 4.0 * PI / 3.0, "{ratio}");
    }

    #[test]
    fn rejects_nonpositive_radius() {
        let p = round_sphere(3, 1.0, 40);
        assert!(ball_volume(&p, MeridianPoint::new(0.5, 0.0), 0.0).is_err());
    }
}
