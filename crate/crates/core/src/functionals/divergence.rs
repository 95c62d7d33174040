use serde::{Deserialize, Serialize};

use super::dyadic::integrate_p;
use super::series::last_decade_start;
use crate::flow::{estimate_singular_time, FlowTrace};
use crate::geometry::{sphere_area, trapezoid};

/// Cumulative time integrals of the curvature along a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceIntegrals {
    pub t: Vec<f64>,
    /// `∫₀^t P dt`.
    pub int_p: Vec<f64>,
    /// Exponent used in `∫∫|R|^α dV dt`, `α = (n+2)/2`.
    pub alpha: f64,
    /// `∫|R|^α dV` per snapshot.
    pub space_r_alpha: Vec<f64>,
    /// `∫₀^t ∫|R|^α dV dt`.
    pub int_r_alpha: Vec<f64>,
    /// Least-squares slope of `∫P` against `log(1/(T̂−t))` over the last
    /// decade of `Q`. A finite positive slope means logarithmic growth.
    pub growth_slope: Option<f64>,
}

/// Cumulative `∫P dt` and `∫∫|R|^{(n+2)/2} dV dt` (trapezoid in time,
/// trapezoid over the grid in space with `dV = ω_{n−1} ψ^{n−1} φ dx`).
pub fn divergence_integrals(trace: &FlowTrace) -> DivergenceIntegrals {
    let n = trace.dimension();
    let alpha = (n as f64 + 2.0) / 2.0;
    let times = &trace.times;
    let p = trace.p_series();

    let mut int_p = Vec::with_capacity(times.len());
    for k in 0..times.len() {
        int_p.push(match k {
            0 => 0.0,
            _ => int_p[k - 1] + integrate_p(times, &p, times[k - 1], times[k]),
        });
    }

    let space_r_alpha: Vec<f64> = trace
        .profiles
        .iter()
        .zip(&trace.curvatures)
        .map(|(prof, field)| {
            let e = (prof.n - 1) as i32;
            let f: Vec<f64> = field
                .scalar
                .iter()
                .zip(prof.phi.iter().zip(&prof.psi))
                .map(|(r, (ph, ps))| r.abs().powf(alpha) * ps.powi(e) * ph)
                .collect();
            sphere_area(prof.n - 1) * trapezoid(&f, prof.h())
        })
        .collect();
    let mut int_r_alpha = Vec::with_capacity(space_r_alpha.len());
    for k in 0..space_r_alpha.len() {
        int_r_alpha.push(match k {
            0 => 0.0,
            _ => int_r_alpha[k - 1] + 0.5 * (times[k] - times[k - 1]) * (space_r_alpha[k] + space_r_alpha[k - 1]),
        });
    }

    let growth_slope = estimate_singular_time(trace).ok().and_then(|est| {
        let start = last_decade_start(&trace.q_series());
        let pts: Vec<(f64, f64)> = (start..times.len())
            .filter(|&k| times[k] < est.t_hat)
            .map(|k| ((1.0 / (est.t_hat - times[k])).ln(), int_p[k]))
            .collect();
        slope(&pts)
    });

    DivergenceIntegrals {
        t: times.clone(),
        int_p,
        alpha,
        space_r_alpha,
        int_r_alpha,
        growth_slope,
    }
}

fn slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let xm = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - xm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
