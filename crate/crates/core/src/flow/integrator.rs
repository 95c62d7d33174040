use crate::error::{LabError, Result};
use crate::geometry::curvature::sectional;
use crate::geometry::stencil::{d1, d2, even_pole_extrapolation, Parity};
use crate::geometry::WarpedProfile;
use std::f64::consts::PI;

/// Gauge of the integrator.
///
/// Plain Ricci flow is only weakly parabolic, and at fixed `x` the radial
/// profile obeys a transport equation whose speed grows like `1/x` at the
/// poles; central differences turn that into a growing pole mode. The
/// integrator therefore solves Ricci–DeTurck flow, `∂ₜg = −2Ric + 𝓛_W g`,
/// with `Wᵏ = gⁱʲ(Γᵏᵢⱼ − Γ̄ᵏᵢⱼ)` taken against the round background
/// `ḡ = π²dx² + sin²(πx)·g_{S^{n−1}}`. Only the radial component survives:
///
/// `v = φₓ/φ³ − (n−1)ψₓ/(φ²ψ) + (n−1)·sin(πx)cos(πx)/(πψ²)`,
///
/// and the reduced system reads
///
/// * `φ_t = −φ·ric_rad + (vφ)ₓ`,
/// * `ψ_t = −ψ·ric_sph + v·ψₓ`,
/// * material labels follow `X_t = v·Xₓ`.
///
/// The solution is the Ricci flow pulled back by the diffeomorphisms that
/// `v` generates, so every geometric quantity is unchanged; node-wise time
/// derivatives differ from Ricci-flow ones by `v·fₓ`.
pub(crate) struct Rates {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub material: Vec<f64>,
}

/// `sin(πx)cos(πx)/π` on the grid, exactly odd about `x = ½`.
pub(crate) fn background(len: usize) -> Vec<f64> {
    let last = len - 1;
    let mut b = vec![0.0; len];
    for i in 1..=last / 2 {
        let x = i as f64 / last as f64;
        b[i] = (2.0 * PI * x).sin() / (2.0 * PI);
        b[last - i] = -b[i];
    }
    if last % 2 == 0 {
        b[last / 2] = 0.0;
    }
    b
}

/// The part of the DeTurck velocity that does not involve `φₓ`:
/// `w = −(n−1)ψₓ/(φ²ψ) + (n−1)·b/ψ²`, zero at the poles.
fn deturck_rest(n: usize, phi: &[f64], psi: &[f64], psi_x: &[f64], bg: &[f64]) -> Vec<f64> {
    let last = psi.len() - 1;
    let m = (n - 1) as f64;
    let mut w = vec![0.0; psi.len()];
    for i in 1..last {
        let (p, q) = (phi[i], psi[i]);
        w[i] = -m * psi_x[i] / (p * p * q) + m * bg[i] / (q * q);
    }
    w
}

pub(crate) fn rates(n: usize, phi: &[f64], psi: &[f64], material: &[f64], bg: &[f64], h: f64) -> Rates {
    let sec = sectional(phi, psi, h);
    let m = (n - 1) as f64;
    let len = psi.len();
    let last = len - 1;
    let phi_x = d1(phi, Parity::Even, h);
    let phi_xx = d2(phi, Parity::Even, h);
    let psi_x = d1(psi, Parity::Odd, h);
    let mat_x = d1(material, Parity::Odd, h);
    let w = deturck_rest(n, phi, psi, &psi_x, bg);
    let bphi: Vec<f64> = bg.iter().zip(phi).map(|(b, p)| b * p).collect();
    let bphi_x = d1(&bphi, Parity::Odd, h);
    let mut out = Rates {
        phi: vec![0.0; len],
        psi: vec![0.0; len],
        material: vec![0.0; len],
    };
    for i in 1..last {
        let p = phi[i];
        // (φₓ/φ²)ₓ with a compact second difference so the odd-even mode is damped
        let diffusion = phi_xx[i] / (p * p) - 2.0 * phi_x[i] * phi_x[i] / (p * p * p);
        let v = w[i] + phi_x[i] / (p * p * p);
        // −φ·ric_rad + (wφ)ₓ with the ψₓₓ and φₓψₓ terms cancelled by hand
        let q = psi[i];
        let bracket = psi_x[i] * psi_x[i] / p + bphi_x[i] - 2.0 * bphi[i] * psi_x[i] / q;
        out.phi[i] = m * bracket / (q * q) + diffusion;
        let ric_sph = sec.k_rad[i] + (m - 1.0) * sec.k_sph[i];
        out.psi[i] = -psi[i] * ric_sph + v * psi_x[i];
        out.material[i] = v * mat_x[i];
    }
    // The radial profile is even about each pole; its rate there follows
    // the interior instead of the singular pole formulas.
    out.phi[0] = even_pole_extrapolation(out.phi[1], out.phi[2], out.phi[3]);
    out.phi[last] = even_pole_extrapolation(out.phi[last - 1], out.phi[last - 2], out.phi[last - 3]);
    out
}

/// DeTurck velocity `v` at every node; zero at the poles.
pub(crate) fn deturck_velocity(n: usize, phi: &[f64], psi: &[f64], bg: &[f64], h: f64) -> Vec<f64> {
    let phi_x = d1(phi, Parity::Even, h);
    let psi_x = d1(psi, Parity::Odd, h);
    let mut v = deturck_rest(n, phi, psi, &psi_x, bg);
    let last = psi.len() - 1;
    for i in 1..last {
        v[i] += phi_x[i] / (phi[i] * phi[i] * phi[i]);
    }
    v
}

/// Gauge velocity `v` of a profile (see [`Rates`]); zero on round spheres.
pub fn gauge_velocity(profile: &WarpedProfile) -> Vec<f64> {
    let bg = background(profile.psi.len());
    deturck_velocity(profile.n, &profile.phi, &profile.psi, &bg, profile.h())
}

/// Shortest meridian cell `Δs_min = min φ̄ᵢ·h`.
pub(crate) fn min_cell(profile: &WarpedProfile) -> f64 {
    let h = profile.h();
    profile
        .phi
        .windows(2)
        .map(|w| 0.5 * (w[0] + w[1]) * h)
        .fold(f64::INFINITY, f64::min)
}

/// Parabolic step limit `cfl·Δs_min²/2`, shrunk by `3/(n−1)` above `n = 4`
/// because the pole terms of the `φ` rate carry a factor `n−1`.
pub fn stable_dt(profile: &WarpedProfile, cfl: f64) -> f64 {
    let ds = min_cell(profile);
    let stiffness = (3.0 / (profile.n as f64 - 1.0)).min(1.0);
    stiffness * cfl * ds * ds / 2.0
}

fn axpy(base: &[f64], k: &[f64], a: f64) -> Vec<f64> {
    base.iter().zip(k).map(|(b, k)| b + a * k).collect()
}

/// One classical Runge–Kutta step of length `dt`.
///
/// Fails with [`LabError::NumericalBreakdown`] if the result has a
/// non-positive `ψ` at an interior node or any non-finite value; the caller
/// is expected to retry with a smaller `dt`.
pub fn step(profile: &WarpedProfile, dt: f64) -> Result<WarpedProfile> {
    if dt == 0.0 {
        return Ok(profile.clone());
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(LabError::Refused(format!("time step must be positive, got {dt}")));
    }
    let n = profile.n;
    let h = profile.h();
    let y0 = [&profile.phi[..], &profile.psi[..], &profile.material[..]];
    let bg = background(y0[1].len());
    let eval = |y: [&[f64]; 3]| {
        let r = rates(n, y[0], y[1], y[2], &bg, h);
        [r.phi, r.psi, r.material]
    };
    let shifted = |k: &[Vec<f64>; 3], a: f64| -> [Vec<f64>; 3] {
        [axpy(y0[0], &k[0], a), axpy(y0[1], &k[1], a), axpy(y0[2], &k[2], a)]
    };
    let ka = eval(y0);
    let ya = shifted(&ka, 0.5 * dt);
    let kb = eval([&ya[0], &ya[1], &ya[2]]);
    let yb = shifted(&kb, 0.5 * dt);
    let kc = eval([&yb[0], &yb[1], &yb[2]]);
    let yc = shifted(&kc, dt);
    let kd = eval([&yc[0], &yc[1], &yc[2]]);
    let combine = |c: usize| -> Vec<f64> {
        (0..y0[c].len())
            .map(|i| y0[c][i] + dt / 6.0 * (ka[c][i] + 2.0 * (kb[c][i] + kc[c][i]) + kd[c][i]))
            .collect()
    };
    let phi = combine(0);
    let mut psi = combine(1);
    let mut material = combine(2);
    let last = psi.len() - 1;
    psi[0] = 0.0;
    psi[last] = 0.0;
    material[0] = profile.material[0];
    material[last] = profile.material[last];
    for i in 0..=last {
        if !(phi[i].is_finite() && phi[i] > 0.0) {
            return Err(LabError::NumericalBreakdown {
                node: i,
                what: format!("phi = {} after step", phi[i]),
            });
        }
        if !psi[i].is_finite() || (i != 0 && i != last && psi[i] <= 0.0) {
            return Err(LabError::NumericalBreakdown {
                node: i,
                what: format!("psi = {} after step (singularity overshoot)", psi[i]),
            });
        }
    }
    Ok(WarpedProfile {
        n,
        grid: profile.grid.clone(),
        phi,
        psi,
        time: profile.time + dt,
        material,
    })
}
