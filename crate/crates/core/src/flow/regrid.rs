//! Node redistribution along the meridian.
//!
//! The coordinate grid stays uniform in `x`; what moves is the map from `x`
//! to the manifold. New nodes equidistribute the curvature monitor
//! `m = √(|Rm| + (π/L)²)` in arclength, so a thinning neck keeps a fixed
//! number of nodes per curvature radius.

use std::f64::consts::PI;

use crate::geometry::stencil::{d1, Parity};
use crate::geometry::{arclength_unchecked, hermite, WarpedProfile};

/// Largest `Δs·√|Rm|` over cells: the grid resolution relative to the
/// local curvature scale.
pub(crate) fn resolution(profile: &WarpedProfile, norm_rm: &[f64]) -> f64 {
    let h = profile.h();
    (0..profile.intervals())
        .map(|i| {
            let ds = 0.5 * (profile.phi[i] + profile.phi[i + 1]) * h;
            ds * norm_rm[i].max(norm_rm[i + 1]).sqrt()
        })
        .fold(0.0, f64::max)
}

fn smooth(v: &[f64]) -> Vec<f64> {
    let last = v.len() - 1;
    (0..=last)
        .map(|i| {
            let l = if i == 0 { v[1] } else { v[i - 1] };
            let r = if i == last { v[last - 1] } else { v[i + 1] };
            0.25 * (l + 2.0 * v[i] + r)
        })
        .collect()
}

fn is_mirror_symmetric(p: &WarpedProfile) -> bool {
    let last = p.psi.len() - 1;
    (0..=last / 2).all(|i| p.psi[i] == p.psi[last - i] && p.phi[i] == p.phi[last - i])
}

/// Returns the same metric sampled at equidistributed nodes.
pub(crate) fn regrid(profile: &WarpedProfile, norm_rm: &[f64]) -> WarpedProfile {
    let len = profile.grid.len();
    let last = len - 1;
    let h = profile.h();
    let s = arclength_unchecked(profile);
    let total = s[last];
    let floor = (PI / total).powi(2);
    let mut m: Vec<f64> = norm_rm.iter().map(|q| (q + floor).sqrt()).collect();
    for _ in 0..2 {
        m = smooth(&m);
    }
    let mut c = Vec::with_capacity(len);
    c.push(0.0);
    for i in 1..len {
        let prev = c[i - 1];
        c.push(prev + 0.5 * (m[i] + m[i - 1]) * (s[i] - s[i - 1]));
    }
    let mass = c[last];
    let inv_slopes: Vec<f64> = m.iter().map(|v| 1.0 / v).collect();
    let mut s_new: Vec<f64> = (0..len)
        .map(|j| hermite(&c, &s, &inv_slopes, mass * j as f64 / last as f64))
        .collect();
    s_new[0] = 0.0;
    s_new[last] = total;

    let mut phi_new = d1(&s_new, Parity::Odd, h);
    let dpsi = d1(&profile.psi, Parity::Odd, h);
    let dmat = d1(&profile.material, Parity::Odd, h);
    let psi_s: Vec<f64> = dpsi.iter().zip(&profile.phi).map(|(d, p)| d / p).collect();
    let mat_s: Vec<f64> = dmat.iter().zip(&profile.phi).map(|(d, p)| d / p).collect();
    let mut psi_new: Vec<f64> = s_new.iter().map(|&v| hermite(&s, &profile.psi, &psi_s, v)).collect();
    let mut mat_new: Vec<f64> = s_new
        .iter()
        .map(|&v| hermite(&s, &profile.material, &mat_s, v))
        .collect();
    psi_new[0] = 0.0;
    psi_new[last] = 0.0;
    mat_new[0] = profile.material[0];
    mat_new[last] = profile.material[last];
    if is_mirror_symmetric(profile) {
        // cumulative sums run left to right; copy the left half so that
        // exactly symmetric data stays exactly symmetric
        for i in 0..=last / 2 {
            phi_new[last - i] = phi_new[i];
            psi_new[last - i] = psi_new[i];
            mat_new[last - i] = 1.0 - mat_new[i];
        }
    }
    WarpedProfile {
        n: profile.n,
        grid: profile.grid.clone(),
        phi: phi_new,
        psi: psi_new,
        time: profile.time,
        material: mat_new,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{dumbbell_profile, DumbbellParams};
    use crate::geometry::{curvature, round_sphere};

    #[test]
    fn sphere_grid_is_a_fixed_point() {
        let p = round_sphere(3, 1.0, 200);
        let f = curvature(&p).unwrap();
        let q = regrid(&p, &f.norm_rm);
        for i in 0..=200 {
            assert!((q.psi[i] - p.psi[i]).abs() < 1e-6);
            assert!((q.phi[i] - p.phi[i]).abs() < 1e-5);
        }
    }

    #[test]
    fn dumbbell_regrid_preserves_geometry() {
        let p = dumbbell_profile(3, 400, &DumbbellParams::default()).unwrap();
        let f = curvature(&p).unwrap();
        let q = regrid(&p, &f.norm_rm);
        q.validate().unwrap();
        assert!((q.diameter() - p.diameter()).abs() < 1e-6);
        assert!((q.volume() - p.volume()).abs() < 1e-5 * p.volume());
        assert!((q.neck_radius().unwrap() - 0.2).abs() < 1e-6);
        let g = curvature(&q).unwrap();
        assert!((g.sup_rm() - f.sup_rm()).abs() < 1e-3 * f.sup_rm());
        assert!(resolution(&q, &g.norm_rm) < resolution(&p, &f.norm_rm));
        for i in 0..=400 {
            assert_eq!(q.psi[i], q.psi[400 - i]);
            assert_eq!(q.phi[i], q.phi[400 - i]);
        }
    }
}
