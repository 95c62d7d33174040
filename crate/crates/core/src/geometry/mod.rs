//! Rotationally symmetric metrics `g = φ(x)²dx² + ψ(x)²g_{S^{n-1}}` on `Sⁿ`.
//!
//! The coordinate `x ∈ [0, 1]` runs from one pole to the other on a uniform
//! grid. `φ` converts coordinate length into arclength and `ψ` is the radius
//! of the orbit sphere through each node. Smoothness at the poles makes `φ`
//! even and `ψ` odd under reflection through either pole, which is how the
//! finite-difference stencils fill their ghost nodes.

pub(crate) mod curvature;
mod geodesic;
pub(crate) mod stencil;
mod volume;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub(crate) use curvature::argmax_abs;
pub use curvature::{curvature, CurvatureField, NormConvention};
pub use geodesic::{geodesic_distance, Distance, DistanceMethod, MeridianPoint, MeridianSurface};
pub use volume::{ball_volume, sphere_area, sublevel_sin_power, BallVolume};

/// Minimum number of grid intervals; the pole extrapolation uses three
/// interior nodes and the stencils reach two nodes out.
pub const MIN_INTERVALS: usize = 8;

const UNIFORM_TOL: f64 = 1e-9;

/// The warped-product metric at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpedProfile {
    /// Manifold dimension `n ≥ 3`.
    pub n: usize,
    /// Uniform coordinates `x₀ = 0 < … < x_N = 1`.
    pub grid: Vec<f64>,
    /// Radial profile `φ > 0`.
    pub phi: Vec<f64>,
    /// Orbit-sphere radius `ψ`, zero at both poles.
    pub psi: Vec<f64>,
    /// Flow time.
    pub time: f64,
    /// Material coordinate of each node: the `x` it had at the start of the
    /// run. Regridding moves nodes; these labels keep track of which point
    /// of the manifold a node sits on.
    pub material: Vec<f64>,
}

impl WarpedProfile {
    /// Builds a profile on the uniform grid `xᵢ = i/N` and validates it.
    pub fn new(n: usize, phi: Vec<f64>, psi: Vec<f64>, time: f64) -> Result<Self> {
        let intervals = phi.len().saturating_sub(1);
        let grid = uniform_grid(intervals);
        let material = grid.clone();
        let profile = Self {
            n,
            grid,
            phi,
            psi,
            time,
            material,
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Number of grid intervals `N`.
    pub fn intervals(&self) -> usize {
        self.grid.len() - 1
    }

    /// Grid spacing `h = 1/N`.
    pub fn h(&self) -> f64 {
        1.0 / self.intervals() as f64
    }

    /// Checks every structural invariant (dimension, grid, signs, pole closure).
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LabError::InvalidProfile(msg));
        if self.n < 3 {
            return bad(format!("dimension {} < 3", self.n));
        }
        let len = self.grid.len();
        if len < MIN_INTERVALS + 1 {
            return bad(format!("need at least {} grid intervals", MIN_INTERVALS));
        }
        if self.phi.len() != len || self.psi.len() != len || self.material.len() != len {
            return bad("grid, phi, psi and material lengths differ".into());
        }
        if self.grid[0] != 0.0 || self.grid[len - 1] != 1.0 {
            return bad("grid must start at 0 and end at 1".into());
        }
        let h = 1.0 / (len - 1) as f64;
        for (i, w) in self.grid.windows(2).enumerate() {
            if w[1] <= w[0] {
                return bad(format!("grid not strictly increasing at node {}", i + 1));
            }
            if ((w[1] - w[0]) - h).abs() > UNIFORM_TOL {
                return bad(format!("grid not uniform at node {}", i + 1));
            }
        }
        if !self.time.is_finite() {
            return bad("time is not finite".into());
        }
        for (i, &p) in self.phi.iter().enumerate() {
            if !(p > 0.0 && p.is_finite()) {
                return bad(format!("phi must be positive and finite (node {i}, value {p})"));
            }
        }
        if self.psi[0] != 0.0 || self.psi[len - 1] != 0.0 {
            return bad("psi must vanish at both poles".into());
        }
        for (i, &p) in self.psi.iter().enumerate().take(len - 1).skip(1) {
            if !(p > 0.0 && p.is_finite()) {
                return bad(format!("psi must be positive at interior node {i} (value {p})"));
            }
        }
        Ok(())
    }

    /// `dψ/ds` at the two poles, from the reflected fourth-order stencil.
    pub fn pole_slopes(&self) -> (f64, f64) {
        let h = self.h();
        let dpsi = stencil::d1(&self.psi, stencil::Parity::Odd, h);
        let last = self.intervals();
        (dpsi[0] / self.phi[0], dpsi[last] / self.phi[last])
    }

    /// Checks `dψ/ds → +1` at `x = 0` and `→ −1` at `x = 1` within `tol`.
    pub fn check_pole_regularity(&self, tol: f64) -> Result<()> {
        let (north, south) = self.pole_slopes();
        if (north - 1.0).abs() > tol || (south + 1.0).abs() > tol {
            return Err(LabError::InvalidProfile(format!(
                "pole regularity violated: dpsi/ds = {north:.6} at x=0, {south:.6} at x=1"
            )));
        }
        Ok(())
    }

    /// Applies the scaling `φ → cφ`, `ψ → cψ`, `t → c²t`.
    pub fn rescaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            grid: self.grid.clone(),
            phi: self.phi.iter().map(|p| p * c).collect(),
            psi: self.psi.iter().map(|p| p * c).collect(),
            time: self.time * c * c,
            material: self.material.clone(),
        }
    }

    /// Total arclength from pole to pole, which is also the diameter.
    pub fn diameter(&self) -> f64 {
        *arclength_unchecked(self).last().unwrap()
    }

    /// Smallest interior local minimum of `ψ`, if the profile has one.
    pub fn neck_radius(&self) -> Option<f64> {
        let len = self.psi.len();
        (2..len - 2)
            .filter(|&i| self.psi[i] <= self.psi[i - 1] && self.psi[i] <= self.psi[i + 1])
            .filter(|&i| self.psi[i] < self.psi[i - 2] || self.psi[i] < self.psi[i + 2])
            .map(|i| self.psi[i])
            .reduce(f64::min)
    }

    /// Riemannian volume `ω_{n−1} ∫ ψ^{n−1} φ dx` (trapezoid rule).
    pub fn volume(&self) -> f64 {
        let h = self.h();
        let e = (self.n - 1) as i32;
        let f: Vec<f64> = self
            .phi
            .iter()
            .zip(&self.psi)
            .map(|(p, q)| p * q.powi(e))
            .collect();
        sphere_area(self.n - 1) * trapezoid(&f, h)
    }
}

/// `xᵢ = i/N` with exact end points.
pub fn uniform_grid(intervals: usize) -> Vec<f64> {
    if intervals == 0 {
        return vec![0.0];
    }
    let mut g: Vec<f64> = (0..=intervals).map(|i| i as f64 / intervals as f64).collect();
    g[intervals] = 1.0;
    g
}

/// Cumulative arclength `sᵢ = ∫₀^{xᵢ} φ dx` by the trapezoid rule.
pub fn arclength(profile: &WarpedProfile) -> Result<Vec<f64>> {
    if let Some((i, p)) = profile
        .phi
        .iter()
        .enumerate()
        .find(|(_, p)| !(**p > 0.0 && p.is_finite()))
    {
        return Err(LabError::InvalidProfile(format!(
            "phi must be positive (node {i}, value {p})"
        )));
    }
    Ok(arclength_unchecked(profile))
}

pub(crate) fn arclength_unchecked(profile: &WarpedProfile) -> Vec<f64> {
    cumulative_trapezoid(&profile.phi, &profile.grid)
}

pub(crate) fn cumulative_trapezoid(f: &[f64], x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..f.len() {
        acc += 0.5 * (f[i] + f[i - 1]) * (x[i] - x[i - 1]);
        out.push(acc);
    }
    out
}

pub(crate) fn trapezoid(f: &[f64], h: f64) -> f64 {
    if f.len() < 2 {
        return 0.0;
    }
    let inner: f64 = f[1..f.len() - 1].iter().sum();
    h * (inner + 0.5 * (f[0] + f[f.len() - 1]))
}

/// Cubic Hermite interpolation on a monotone abscissa.
pub(crate) fn hermite(xs: &[f64], ys: &[f64], slopes: &[f64], x: f64) -> f64 {
    let last = xs.len() - 1;
    if x <= xs[0] {
        return ys[0] + slopes[0] * (x - xs[0]);
    }
    if x >= xs[last] {
        return ys[last] + slopes[last] * (x - xs[last]);
    }
    let j = match xs.partition_point(|&v| v <= x) {
        0 => 0,
        k => (k - 1).min(last - 1),
    };
    let dx = xs[j + 1] - xs[j];
    let t = (x - xs[j]) / dx;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * ys[j] + h10 * dx * slopes[j] + h01 * ys[j + 1] + h11 * dx * slopes[j + 1]
}

#[cfg(test)]
pub(crate) fn round_sphere(n: usize, radius: f64, intervals: usize) -> WarpedProfile {
    let grid = uniform_grid(intervals);
    let phi = vec![std::f64::consts::PI * radius; intervals + 1];
    let mut psi: Vec<f64> = grid
        .iter()
        .map(|x| radius * (std::f64::consts::PI * x).sin())
        .collect();
    psi[0] = 0.0;
    psi[intervals] = 0.0;
    WarpedProfile::new(n, phi, psi, 0.0).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn arclength_identity_for_unit_phi() {
        let mut p = round_sphere(3, 1.0, 10);
        p.phi = vec![1.0; 11];
        let s = arclength(&p).unwrap();
        for (si, xi) in s.iter().zip(&p.grid) {
            assert!((si - xi).abs() < 1e-15);
        }
        p.phi = vec![2.0; 11];
        let s = arclength(&p).unwrap();
        for (si, xi) in s.iter().zip(&p.grid) {
            assert!((si - 2.0 * xi).abs() < 1e-15);
        }
    }

    #[test]
    fn arclength_of_round_three_sphere() {
        let p = round_sphere(3, 1.0, 200);
        let s = arclength(&p).unwrap();
        assert!((s[200] - PI).abs() < 1e-3);
        assert!(s.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn arclength_rejects_nonpositive_phi() {
        let mut p = round_sphere(3, 1.0, 20);
        p.phi[4] = 0.0;
        assert!(matches!(arclength(&p), Err(LabError::InvalidProfile(_))));
    }

    #[test]
    fn validation_catches_broken_invariants() {
        let p = round_sphere(3, 1.0, 20);
        let mut q = p.clone();
        q.psi[0] = 1e-3;
        assert!(q.validate().is_err());
        let mut q = p.clone();
        q.psi[7] = -0.1;
        assert!(q.validate().is_err());
        let mut q = p.clone();
        q.n = 2;
        assert!(q.validate().is_err());
        let mut q = p.clone();
        q.grid[3] = q.grid[2];
        assert!(q.validate().is_err());
        assert!(p.check_pole_regularity(1e-3).is_ok());
        let mut q = p.clone();
        for v in q.phi.iter_mut() {
            *v *= 1.2;
        }
        assert!(q.check_pole_regularity(1e-2).is_err());
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let xs: Vec<f64> = (0..6).map(|i| i as f64 * 0.3).collect();
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
        let df = |x: f64| -2.0 + 1.5 * x * x;
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let ds: Vec<f64> = xs.iter().map(|&x| df(x)).collect();
        for k in 0..50 {
            let x = 1.5 * k as f64 / 49.0;
            assert!((hermite(&xs, &ys, &ds, x) - f(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_volume_and_diameter() {
        let p = round_sphere(3, 1.0, 400);
        assert!((p.diameter() - PI).abs() < 1e-12);
        assert!((p.volume() - 2.0 * PI * PI).abs() < 1e-3);
        assert!(p.neck_radius().is_none());
    }
}
