use serde::{Deserialize, Serialize};

/// Curvature of the product `S^m(r) × ℝ^{n−m}` (constant in space).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductCurvature {
    /// `|Rm|`.
    pub rm: f64,
    /// `|Ric|`.
    pub ric: f64,
    /// `|R|`.
    pub scalar: f64,
}

/// Frame norms of `S^m(r) × ℝ^{n−m}`; `m = 0` is flat space. Ricci has `m`
/// eigenvalues `(m−1)/r²` and `n − m` zeros; `|Rm|² = 2m(m−1)/r⁴`.
pub fn product_curvature(m: usize, radius_sq: f64) -> ProductCurvature {
    if m < 2 {
        return ProductCurvature {
            rm: 0.0,
            ric: 0.0,
            scalar: 0.0,
        };
    }
    let mf = m as f64;
    let k = 1.0 / radius_sq;
    ProductCurvature {
        rm: (2.0 * mf * (mf - 1.0)).sqrt() * k,
        ric: mf.sqrt() * (mf - 1.0) * k,
        scalar: mf * (mf - 1.0) * k,
    }
}

/// A closed-form shrinking soliton at the normalization where it becomes
/// singular one time unit later.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonEntry {
    pub name: String,
    pub dimension: usize,
    /// Dimension of the round sphere factor (0 for flat space).
    pub sphere_dim: usize,
    /// Squared radius of the sphere factor.
    pub radius_sq: f64,
    pub curvature: ProductCurvature,
    /// `min{√(sup|Rm|·sup|R|), sup|Ric|}`.
    pub gap: f64,
    pub normalization: String,
}

impl SolitonEntry {
    fn new(name: String, n: usize, m: usize) -> Self {
        // r² = 2(m−1) makes the sphere factor vanish at t = 1
        let radius_sq = if m >= 2 { 2.0 * (m as f64 - 1.0) } else { f64::INFINITY };
        let curvature = product_curvature(m, radius_sq);
        let gap = (curvature.rm * curvature.scalar).sqrt().min(curvature.ric);
        let normalization = if m >= 2 {
            format!("sphere factor radius² = 2({m}−1) = {radius_sq}, extinct after unit time")
        } else {
            "flat, static".to_string()
        };
        Self {
            name,
            dimension: n,
            sphere_dim: m,
            radius_sq,
            curvature,
            gap,
            normalization,
        }
    }

    pub fn is_flat(&self) -> bool {
        self.sphere_dim < 2
    }
}

/// Round spheres and cylinders in dimensions 3 to 5, and flat space.
pub fn soliton_gallery() -> Vec<SolitonEntry> {
    let mut out = Vec::new();
    for n in 3..=5 {
        out.push(SolitonEntry::new(format!("round S^{n}"), n, n));
    }
    for n in 3..=5 {
        out.push(SolitonEntry::new(format!("cylinder S^{}xR", n - 1), n, n - 1));
    }
    out.push(SolitonEntry::new("flat R^3".into(), 3, 0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        let g = soliton_gallery();
        let s3 = g.iter().find(|e| e.name == "round S^3").unwrap();
        assert!((s3.curvature.ric - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!(((s3.curvature.rm * s3.curvature.scalar).sqrt() - 1.1398).abs() < 1e-4);
        assert!((s3.gap - 0.8660254).abs() < 1e-7);
        let cyl = g.iter().find(|e| e.name == "cylinder S^2xR").unwrap();
        assert!((cyl.gap - 0.5f64.sqrt()).abs() < 1e-12);
        let flat = g.iter().find(|e| e.is_flat()).unwrap();
        assert_eq!(flat.gap, 0.0);
        assert!(g.iter().filter(|e| !e.is_flat()).all(|e| e.gap > 0.0));
    }

    #[test]
    fn matches_the_sphere_norm_convention() {
        use crate::geometry::NormConvention;
        for n in 3..=6 {
            let c = product_curvature(n, 2.5);
            let [_, _, r, ric, rm, _] = NormConvention::from_sectional(n, 0.4, 0.4);
            assert!((c.scalar - r).abs() < 1e-12);
            assert!((c.ric - ric).abs() < 1e-12);
            assert!((c.rm - rm).abs() < 1e-12);
        }
    }
}
