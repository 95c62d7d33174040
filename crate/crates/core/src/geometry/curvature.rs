use serde::{Deserialize, Serialize};

use super::stencil::{d1, d2, even_pole_extrapolation, Parity};
use super::WarpedProfile;
use crate::error::{LabError, Result};

/// Pointwise curvature of a warped profile.
///
/// Tensor norms follow [`NormConvention`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureField {
    pub n: usize,
    /// Sectional curvature of planes containing the radial direction.
    pub k_rad: Vec<f64>,
    /// Sectional curvature of planes tangent to the orbit sphere.
    pub k_sph: Vec<f64>,
    pub ric_rad: Vec<f64>,
    pub ric_sph: Vec<f64>,
    pub scalar: Vec<f64>,
    pub norm_ric: Vec<f64>,
    pub norm_rm: Vec<f64>,
    pub norm_ric_minus: Vec<f64>,
}

/// Frobenius norms in an orthonormal frame adapted to the warped product:
/// `|Ric|² = Σ Rᵢⱼ²` and `|Rm|² = Σ Rᵢⱼₖₗ²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NormConvention;

impl NormConvention {
    /// `|Ric|² = ric_rad² + (n−1)·ric_sph²`.
    pub fn ricci_norm(n: usize, ric_rad: f64, ric_sph: f64) -> f64 {
        (ric_rad * ric_rad + (n - 1) as f64 * ric_sph * ric_sph).sqrt()
    }

    /// `|Rm|² = 4(n−1)·k_rad² + 2(n−1)(n−2)·k_sph²`.
    pub fn riemann_norm(n: usize, k_rad: f64, k_sph: f64) -> f64 {
        let m = (n - 1) as f64;
        (4.0 * m * k_rad * k_rad + 2.0 * m * (m - 1.0) * k_sph * k_sph).sqrt()
    }

    /// Norm of the negative part of the Ricci eigenvalue list.
    pub fn ricci_minus_norm(n: usize, ric_rad: f64, ric_sph: f64) -> f64 {
        Self::ricci_norm(n, ric_rad.min(0.0), ric_sph.min(0.0))
    }

    /// Pointwise values from the two sectional curvatures:
    /// `(ric_rad, ric_sph, R, |Ric|, |Rm|, |Ric₋|)`.
    pub fn from_sectional(n: usize, k_rad: f64, k_sph: f64) -> [f64; 6] {
        let m = (n - 1) as f64;
        let ric_rad = m * k_rad;
        let ric_sph = k_rad + (m - 1.0) * k_sph;
        let scalar = ric_rad + m * ric_sph;
        [
            ric_rad,
            ric_sph,
            scalar,
            Self::ricci_norm(n, ric_rad, ric_sph),
            Self::riemann_norm(n, k_rad, k_sph),
            Self::ricci_minus_norm(n, ric_rad, ric_sph),
        ]
    }
}

impl CurvatureField {
    pub fn len(&self) -> usize {
        self.scalar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scalar.is_empty()
    }

    /// Index of the node where `|Rm|` is largest (first one on ties).
    pub fn argmax_rm(&self) -> usize {
        argmax(&self.norm_rm)
    }

    pub fn sup_scalar(&self) -> f64 {
        self.scalar.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn sup_ric(&self) -> f64 {
        self.norm_ric.iter().copied().fold(0.0, f64::max)
    }

    pub fn sup_rm(&self) -> f64 {
        self.norm_rm.iter().copied().fold(0.0, f64::max)
    }

    pub fn sup_ric_minus(&self) -> f64 {
        self.norm_ric_minus.iter().copied().fold(0.0, f64::max)
    }

    fn from_sectional(n: usize, k_rad: Vec<f64>, k_sph: Vec<f64>) -> Self {
        let len = k_rad.len();
        let mut f = Self {
            n,
            k_rad,
            k_sph,
            ric_rad: Vec::with_capacity(len),
            ric_sph: Vec::with_capacity(len),
            scalar: Vec::with_capacity(len),
            norm_ric: Vec::with_capacity(len),
            norm_rm: Vec::with_capacity(len),
            norm_ric_minus: Vec::with_capacity(len),
        };
        for i in 0..len {
            let [rr, rs, r, nric, nrm, nminus] =
                NormConvention::from_sectional(n, f.k_rad[i], f.k_sph[i]);
            f.ric_rad.push(rr);
            f.ric_sph.push(rs);
            f.scalar.push(r);
            f.norm_ric.push(nric);
            f.norm_rm.push(nrm);
            f.norm_ric_minus.push(nminus);
        }
        f
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Index of the largest `|vᵢ|` (first on ties).
pub(crate) fn argmax_abs(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    best
}

/// Sectional curvatures on the node grid.
pub(crate) struct Sectional {
    pub k_rad: Vec<f64>,
    pub k_sph: Vec<f64>,
}

/// `k_rad = −ψ_ss/ψ`, `k_sph = (1 − ψ_s²)/ψ²` at interior nodes with
/// `ψ_s = ψ_x/φ` and `ψ_ss = (ψ_xx − φ_x ψ_x/φ)/φ²`. At the poles both
/// curvatures take the even extrapolation of the interior `k_rad`.
pub(crate) fn sectional(phi: &[f64], psi: &[f64], h: f64) -> Sectional {
    let len = psi.len();
    let last = len - 1;
    let psi_x = d1(psi, Parity::Odd, h);
    let psi_xx = d2(psi, Parity::Odd, h);
    let phi_x = d1(phi, Parity::Even, h);
    let mut k_rad = vec![0.0; len];
    let mut k_sph = vec![0.0; len];
    for i in 1..last {
        let p = phi[i];
        let psi_s = psi_x[i] / p;
        let psi_ss = (psi_xx[i] - phi_x[i] * psi_x[i] / p) / (p * p);
        k_rad[i] = -psi_ss / psi[i];
        k_sph[i] = (1.0 - psi_s * psi_s) / (psi[i] * psi[i]);
    }
    let north = even_pole_extrapolation(k_rad[1], k_rad[2], k_rad[3]);
    let south = even_pole_extrapolation(k_rad[last - 1], k_rad[last - 2], k_rad[last - 3]);
    k_rad[0] = north;
    k_sph[0] = north;
    k_rad[last] = south;
    k_sph[last] = south;
    Sectional { k_rad, k_sph }
}

/// Curvature of a warped profile.
///
/// Fails with [`LabError::NumericalBreakdown`] naming the first node where a
/// stencil produced a non-finite value.
pub fn curvature(profile: &WarpedProfile) -> Result<CurvatureField> {
    profile.validate()?;
    let sec = sectional(&profile.phi, &profile.psi, profile.h());
    let field = CurvatureField::from_sectional(profile.n, sec.k_rad, sec.k_sph);
    if let Some(node) = (0..field.len()).find(|&i| {
        !(field.k_rad[i].is_finite() && field.k_sph[i].is_finite() && field.norm_rm[i].is_finite())
    }) {
        return Err(LabError::NumericalBreakdown {
            node,
            what: "non-finite curvature".into(),
        });
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{round_sphere, uniform_grid};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn round_three_sphere_closed_form() {
        let p = round_sphere(3, 1.0, 200);
        let c = curvature(&p).unwrap();
        for i in 0..c.len() {
            assert_relative_eq!(c.k_rad[i], 1.0, epsilon = 5e-5);
            assert_relative_eq!(c.k_sph[i], 1.0, epsilon = 5e-5);
            assert_relative_eq!(c.scalar[i], 6.0, epsilon = 1e-4);
            assert_relative_eq!(c.norm_ric[i], 2.0 * 3f64.sqrt(), epsilon = 1e-4);
            assert_relative_eq!(c.norm_rm[i], 12f64.sqrt(), epsilon = 1e-4);
            assert_eq!(c.norm_ric_minus[i], 0.0);
        }
    }

    #[test]
    fn round_four_sphere_radius_two() {
        let p = round_sphere(4, 2.0, 200);
        let c = curvature(&p).unwrap();
        for i in 0..c.len() {
            assert_relative_eq!(c.scalar[i], 3.0, epsilon = 1e-4);
            assert_relative_eq!(c.norm_rm[i], 24f64.sqrt() / 4.0, epsilon = 1e-4);
        }
    }

    #[test]
    fn cylinder_window_interior() {
        // psi rises linearly from the poles to a flat plateau of radius r.
        let r = 0.5;
        let n_int = 400;
        let grid = uniform_grid(n_int);
        let phi = vec![4.0; n_int + 1];
        let psi: Vec<f64> = grid
            .iter()
            .map(|&x| {
                let s = 4.0 * x.min(1.0 - x);
                if s < r {
                    s
                } else {
                    r
                }
            })
            .collect();
        let p = WarpedProfile::new(3, phi, psi, 0.0).unwrap();
        let c = curvature(&p).unwrap();
        for i in 120..=280 {
            assert!(c.k_rad[i].abs() < 1e-9);
            assert_relative_eq!(c.k_sph[i], 1.0 / (r * r), epsilon = 1e-9);
            assert_relative_eq!(c.ric_sph[i], 1.0 / (r * r), epsilon = 1e-9);
            assert!(c.ric_rad[i].abs() < 1e-9);
            assert_relative_eq!(c.scalar[i], 2.0 / (r * r), epsilon = 1e-9);
        }
    }

    #[test]
    fn grid_refinement_order() {
        let err = |n: usize| {
            let c = curvature(&round_sphere(3, 1.0, n)).unwrap();
            c.scalar.iter().map(|v| (v - 6.0).abs()).fold(0.0, f64::max)
        };
        let (e1, e2, e3) = (err(100), err(200), err(400));
        assert!((e1 / e2).log2() >= 1.9, "{e1} {e2}");
        assert!((e2 / e3).log2() >= 1.9, "{e2} {e3}");
    }

    #[test]
    fn non_finite_values_are_breakdowns() {
        let mut p = round_sphere(3, 1.0, 40);
        p.psi[10] = 1e-300;
        p.psi[11] = 1e300;
        assert!(matches!(
            curvature(&p),
            Err(LabError::NumericalBreakdown { .. })
        ));
    }

    fn smooth_profile(n: usize, a: f64, b: f64, c: f64) -> WarpedProfile {
        let intervals = 160;
        let grid = uniform_grid(intervals);
        let pi = std::f64::consts::PI;
        // φ even about both poles, ψ odd: cosine and sine series.
        let phi: Vec<f64> = grid
            .iter()
            .map(|&x| pi * (1.0 + a * (2.0 * pi * x).cos() * 0.2 - 0.2 * a))
            .collect();
        let mut psi: Vec<f64> = grid
            .iter()
            .map(|&x| (pi * x).sin() + b * (3.0 * pi * x).sin() * 0.1 + c * (2.0 * pi * x).sin() * 0.1)
            .collect();
        psi[0] = 0.0;
        psi[intervals] = 0.0;
        WarpedProfile::new(n, phi, psi, 0.0).unwrap()
    }

    proptest! {
        #[test]
        fn trace_and_cauchy_schwarz(n in 3usize..7, a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0) {
            let p = smooth_profile(n, a, b, c);
            let f = curvature(&p).unwrap();
            for i in 0..f.len() {
                let trace = f.ric_rad[i] + (n - 1) as f64 * f.ric_sph[i];
                prop_assert!((trace - f.scalar[i]).abs() <= 1e-12 * (1.0 + f.scalar[i].abs()));
                prop_assert!(f.scalar[i].powi(2) <= n as f64 * f.norm_ric[i].powi(2) * (1.0 + 1e-12) + 1e-12);
                prop_assert!(f.norm_ric_minus[i] <= f.norm_ric[i]);
            }
        }

        #[test]
        fn curvature_scales_inverse_square(n in 3usize..6, a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0) {
            let p = smooth_profile(n, a, b, c);
            let f1 = curvature(&p).unwrap();
            let f2 = curvature(&p.rescaled(2.0)).unwrap();
            for i in 0..f1.len() {
                for (u, v) in [
                    (f1.k_rad[i], f2.k_rad[i]),
                    (f1.k_sph[i], f2.k_sph[i]),
                    (f1.scalar[i], f2.scalar[i]),
                    (f1.norm_ric[i], f2.norm_ric[i]),
                    (f1.norm_rm[i], f2.norm_rm[i]),
                ] {
                    prop_assert!((u / 4.0 - v).abs() <= 1e-9 * (1.0 + u.abs()));
                }
            }
        }
    }
}
