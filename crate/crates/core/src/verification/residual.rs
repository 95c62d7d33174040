use serde::{Deserialize, Serialize};

use crate::flow::{gauge_velocity, FlowTrace};

/// A snapshot triple whose `Q` grows by more than this factor is too coarse
/// in time for centered differencing and is flagged unreliable.
pub const RELIABLE_Q_GROWTH: f64 = 1.25;

/// Residual of `(∂ₜ − Δ)R − 2|Ric|²` at one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualSnapshot {
    pub index: usize,
    pub t: f64,
    /// `sup|∂ₜR|` over the nodes, the normalization (1 when it vanishes).
    pub scale: f64,
    /// Sup-norm of the residual divided by `scale`.
    pub sup: f64,
    /// Volume-averaged L² norm of the residual divided by `scale`.
    pub l2: f64,
    /// Node where the residual peaks.
    pub worst_node: usize,
    pub reliable: bool,
}

/// Residual of the scalar-curvature evolution identity at every snapshot
/// whose neighbours belong to the same grid epoch.
///
/// `∂ₜR` uses the three-point formula on the uneven snapshot times, with the
/// gauge drift `v·Rₓ` removed so it is the Ricci-flow rate at a fixed point
/// of the manifold. The Laplacian `Δf = f_ss + (n−1)(ψ_s/ψ) f_s` uses second
/// order central differences; at the poles it is `n·f_ss`.
pub fn evolution_residual(trace: &FlowTrace) -> Vec<ResidualSnapshot> {
    let len = trace.len();
    if trace.profiles.len() != len || len < 3 {
        return Vec::new();
    }
    (1..len - 1)
        .filter(|&k| trace.epochs[k - 1] == trace.epochs[k] && trace.epochs[k] == trace.epochs[k + 1])
        .map(|k| snapshot_residual(trace, k))
        .collect()
}

fn snapshot_residual(trace: &FlowTrace, k: usize) -> ResidualSnapshot {
    let profile = &trace.profiles[k];
    let field = &trace.curvatures[k];
    let (r_prev, r, r_next) = (&trace.curvatures[k - 1].scalar, &field.scalar, &trace.curvatures[k + 1].scalar);
    let h1 = trace.times[k] - trace.times[k - 1];
    let h2 = trace.times[k + 1] - trace.times[k];
    let (c_prev, c_mid, c_next) = (-h2 / (h1 * (h1 + h2)), (h2 - h1) / (h1 * h2), h1 / (h2 * (h1 + h2)));

    let n = profile.n as f64;
    let h = profile.h();
    let last = r.len() - 1;
    let v = gauge_velocity(profile);
    let (phi, psi) = (&profile.phi, &profile.psi);

    let mut rate = vec![0.0; r.len()];
    let mut res = vec![0.0; r.len()];
    for i in 0..=last {
        let node_rate = c_prev * r_prev[i] + c_mid * r[i] + c_next * r_next[i];
        let lap = if i == 0 || i == last {
            let inner = if i == 0 { r[1] } else { r[last - 1] };
            n * 2.0 * (inner - r[i]) / (h * h * phi[i] * phi[i])
        } else {
            let r_x = (r[i + 1] - r[i - 1]) / (2.0 * h);
            let r_xx = (r[i + 1] - 2.0 * r[i] + r[i - 1]) / (h * h);
            let phi_x = (phi[i + 1] - phi[i - 1]) / (2.0 * h);
            let psi_x = (psi[i + 1] - psi[i - 1]) / (2.0 * h);
            let p = phi[i];
            let r_s = r_x / p;
            let r_ss = r_xx / (p * p) - phi_x * r_x / (p * p * p);
            rate[i] = node_rate - v[i] * r_x;
            r_ss + (n - 1.0) * (psi_x / (p * psi[i])) * r_s
        };
        if i == 0 || i == last {
            rate[i] = node_rate;
        }
        res[i] = rate[i] - lap - 2.0 * field.norm_ric[i].powi(2);
    }

    let scale = rate.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let worst_node = crate::geometry::argmax_abs(&res);
    let sup = res[worst_node].abs();
    let e = profile.n as i32 - 1;
    let weight: Vec<f64> = phi.iter().zip(psi).map(|(p, q)| p * q.powi(e)).collect();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..=last {
        let w = if i == 0 || i == last { 0.5 * weight[i] } else { weight[i] };
        num += w * res[i] * res[i];
        den += w;
    }
    // a static trace has nothing to normalize by; report raw values
    let norm = if scale > 0.0 { scale } else { 1.0 };
    let q = &trace.functionals;
    let growth = q[k + 1].q / q[k - 1].q;
    ResidualSnapshot {
        index: k,
        t: trace.times[k],
        scale,
        sup: sup / norm,
        l2: (num / den).sqrt() / norm,
        worst_node,
        reliable: growth.max(1.0 / growth) <= RELIABLE_Q_GROWTH && scale > 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{run, FlowStatus, Scenario};
    use crate::geometry::round_sphere;

    #[test]
    fn sphere_residual_is_small() {
        let mut s = Scenario::round_sphere(3, 1.0);
        s.stop_q_ratio = 10.0;
        let trace = run(&s).unwrap();
        let res = evolution_residual(&trace);
        assert_eq!(res.len(), trace.len() - 2);
        for r in &res {
            assert!(r.reliable);
            assert!(r.l2 < 1e-3, "{r:?}");
            assert!(r.l2 <= r.sup);
        }
    }

    #[test]
    fn too_short_traces_give_nothing() {
        let mut s = Scenario::round_sphere(3, 1.0);
        s.max_steps = 10;
        assert!(evolution_residual(&run(&s).unwrap()).is_empty());
    }

    #[test]
    fn epoch_changes_are_skipped() {
        let snaps: Vec<_> = (0..5)
            .map(|k| {
                let mut p = round_sphere(3, 1.0, 60);
                p.time = k as f64;
                (p, u32::from(k >= 2))
            })
            .collect();
        let trace = FlowTrace::from_snapshots(snaps, FlowStatus::Completed).unwrap();
        let idx: Vec<usize> = evolution_residual(&trace).iter().map(|r| r.index).collect();
        assert_eq!(idx, vec![3]);
    }
}
