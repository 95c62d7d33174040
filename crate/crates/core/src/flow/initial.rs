use std::f64::consts::PI;

use super::scenario::{DumbbellParams, InitialFamily, Scenario};
use crate::error::{LabError, Result};
use crate::geometry::{uniform_grid, WarpedProfile};

/// Tolerance on `|dψ/ds| ≤ 1` for constructed profiles.
const SLOPE_TOL: f64 = 1e-9;
/// Samples used to check the slope bound independently of the grid.
const SLOPE_SAMPLES: usize = 4000;

/// Builds the initial metric of a scenario.
pub fn initial_profile(scenario: &Scenario) -> Result<WarpedProfile> {
    scenario.validate()?;
    match scenario.family {
        InitialFamily::RoundSphere { radius } => round_sphere_profile(scenario.n, scenario.grid_n, radius),
        InitialFamily::Dumbbell(p) => dumbbell_profile(scenario.n, scenario.grid_n, &p),
    }
}

/// `φ ≡ πr`, `ψ = r·sin(πx)`.
pub fn round_sphere_profile(n: usize, intervals: usize, radius: f64) -> Result<WarpedProfile> {
    let grid = uniform_grid(intervals);
    let phi = vec![PI * radius; intervals + 1];
    let psi = mirrored(&grid, |x| radius * (PI * x).sin(), true);
    WarpedProfile::new(n, phi, psi, 0.0)
}

struct Dent {
    bump: f64,
    depth: f64,
    uc: f64,
    scale: f64,
    d_north: f64,
    d_south: f64,
    norm: f64,
}

impl Dent {
    fn new(p: &DumbbellParams) -> Self {
        let uc = (PI * p.center).cos();
        let scale = PI * p.width;
        let gauss = |u: f64| (-((u - uc) / scale).powi(2)).exp();
        let d_north = gauss(1.0);
        let d_south = gauss(-1.0);
        let mut dent = Self {
            bump: p.bump,
            depth: 1.0 - p.neck / (p.bump * (PI * p.center).sin()),
            uc,
            scale,
            d_north,
            d_south,
            norm: 1.0,
        };
        dent.norm = 1.0 - dent.line(uc);
        dent
    }

    fn gauss(&self, u: f64) -> f64 {
        (-((u - self.uc) / self.scale).powi(2)).exp()
    }

    /// Chord through the Gaussian's pole values, so the dent vanishes there.
    fn line(&self, u: f64) -> f64 {
        0.5 * (self.d_north * (1.0 + u) + self.d_south * (1.0 - u))
    }

    fn g(&self, u: f64) -> f64 {
        1.0 - self.depth * (self.gauss(u) - self.line(u)) / self.norm
    }

    fn g_u(&self, u: f64) -> f64 {
        let dg = -2.0 * (u - self.uc) / (self.scale * self.scale) * self.gauss(u);
        let dl = 0.5 * (self.d_north - self.d_south);
        -self.depth * (dg - dl) / self.norm
    }

    fn psi(&self, x: f64) -> f64 {
        self.bump * (PI * x).sin() * self.g((PI * x).cos())
    }

    /// `dψ/ds` with `ds = πb·dx`.
    fn psi_s(&self, x: f64) -> f64 {
        let (s, c) = (PI * x).sin_cos();
        c * self.g(c) - s * s * self.g_u(c)
    }
}

/// The bump–neck–bump profile of [`DumbbellParams`].
///
/// Rejects parameter sets whose profile would violate `|dψ/ds| ≤ 1`, which
/// a metric with round caps of radius `b` must satisfy.
pub fn dumbbell_profile(n: usize, intervals: usize, params: &DumbbellParams) -> Result<WarpedProfile> {
    let mut probe = Scenario::dumbbell(n, *params);
    probe.grid_n = intervals.max(50);
    probe.validate()?;
    let dent = Dent::new(params);
    let worst = (0..=SLOPE_SAMPLES)
        .map(|k| dent.psi_s(k as f64 / SLOPE_SAMPLES as f64).abs())
        .fold(0.0, f64::max);
    if worst > 1.0 + SLOPE_TOL {
        return Err(LabError::InvalidProfile(format!(
            "invariant |dpsi/ds| <= 1 violated: max {worst:.6} (widen the dent or raise the neck)"
        )));
    }
    let grid = uniform_grid(intervals);
    let phi = vec![PI * params.bump; intervals + 1];
    let psi = mirrored(&grid, |x| dent.psi(x), params.center == 0.5);
    let profile = WarpedProfile::new(n, phi, psi, 0.0)?;
    profile.check_pole_regularity(5e-2)?;
    Ok(profile)
}

/// Evaluates `f` on the grid with exact zeros at the poles; when `symmetric`
/// the right half is copied from the left so the data is exactly even about ½.
fn mirrored(grid: &[f64], f: impl Fn(f64) -> f64, symmetric: bool) -> Vec<f64> {
    let last = grid.len() - 1;
    let mut v: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    if symmetric {
        for i in 0..=last / 2 {
            v[last - i] = v[i];
        }
    }
    v[0] = 0.0;
    v[last] = 0.0;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{arclength, curvature};

    #[test]
    fn sphere_profile_closed_form() {
        let p = initial_profile(&Scenario::round_sphere(3, 1.0)).unwrap();
        assert!((p.psi[100] - 1.0).abs() < 1e-15);
        let s = arclength(&p).unwrap();
        assert!((s[200] - PI).abs() < 1e-3);
    }

    #[test]
    fn sphere_radius_two_scalar_curvature() {
        for n in [3, 4, 5] {
            let p = initial_profile(&Scenario::round_sphere(n, 2.0)).unwrap();
            let f = curvature(&p).unwrap();
            let exact = (n * (n - 1)) as f64 / 4.0;
            for r in &f.scalar {
                assert!((r - exact).abs() < 1e-3, "n={n}: {r} vs {exact}");
            }
        }
    }

    #[test]
    fn dumbbell_neck_and_poles() {
        let p = dumbbell_profile(3, 400, &DumbbellParams::default()).unwrap();
        assert!((p.psi[200] - 0.2).abs() < 1e-12);
        assert!((p.neck_radius().unwrap() - 0.2).abs() < 1e-12);
        let (north, south) = p.pole_slopes();
        assert!((north - 1.0).abs() < 5e-2 && (south + 1.0).abs() < 5e-2);
        for i in 0..=400 {
            assert_eq!(p.psi[i], p.psi[400 - i]);
        }
    }

    #[test]
    fn dent_derivative_matches_finite_difference() {
        let dent = Dent::new(&DumbbellParams::default());
        for x in [0.05, 0.2, 0.37, 0.5, 0.81] {
            let h = 1e-6;
            let fd = (dent.psi(x + h) - dent.psi(x - h)) / (2.0 * h) / PI;
            assert!((fd - dent.psi_s(x)).abs() < 1e-7);
        }
    }

    #[test]
    fn steep_dent_is_rejected() {
        let params = DumbbellParams {
            width: 0.12,
            ..Default::default()
        };
        match dumbbell_profile(3, 200, &params) {
            Err(LabError::InvalidProfile(msg)) => assert!(msg.contains("|dpsi/ds| <= 1")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn off_center_neck_has_requested_radius() {
        let params = DumbbellParams {
            center: 0.4,
            neck: 0.25,
            width: 0.25,
            ..Default::default()
        };
        let p = dumbbell_profile(3, 500, &params).unwrap();
        assert!((p.psi[200] - 0.25).abs() < 1e-12);
    }
}
