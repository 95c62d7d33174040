use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::flow::FlowTrace;
use crate::geometry::{cumulative_trapezoid, MeridianPoint, MeridianSurface, WarpedProfile};

/// Allowed violation of `|log(d_b/d_a)| ≤ ∫P dt` before a row fails. It
/// covers the distance solver and the time quadrature of `∫P`.
pub const LEDGER_TOL: f64 = 1e-3;

/// One pair over one time window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub pair: usize,
    pub index_a: usize,
    pub index_b: usize,
    pub t_a: f64,
    pub t_b: f64,
    pub d_a: f64,
    pub d_b: f64,
    /// `|log(d_b/d_a)|`.
    pub log_ratio: f64,
    /// `∫_{t_a}^{t_b} P dt`.
    pub int_p: f64,
    /// `int_p − log_ratio`.
    pub margin: f64,
    pub pass: bool,
    /// A distance needed the graph fallback.
    pub fallback: bool,
}

/// Material label of coordinate `x` (linear interpolation of the labels).
pub(crate) fn material_of(profile: &WarpedProfile, x: f64) -> f64 {
    interp(&profile.grid, &profile.material, x)
}

/// Current coordinate of the point with material label `label`.
pub fn position_of_label(profile: &WarpedProfile, label: f64) -> f64 {
    interp(&profile.material, &profile.grid, label)
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let last = xs.len() - 1;
    let k = xs.partition_point(|&v| v <= x).clamp(1, last);
    let w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    ys[k - 1] + w.clamp(0.0, 1.0) * (ys[k] - ys[k - 1])
}

/// Windows `[k, k + stride]` covering the trace.
pub fn consecutive_windows(trace: &FlowTrace, stride: usize) -> Vec<(usize, usize)> {
    let stride = stride.max(1);
    let len = trace.len();
    let mut out: Vec<(usize, usize)> = (0..len.saturating_sub(1))
        .step_by(stride)
        .map(|k| (k, (k + stride).min(len - 1)))
        .collect();
    out.dedup();
    out
}

/// Snapshot index whose time is closest to `t`.
pub fn nearest_snapshot(trace: &FlowTrace, t: f64) -> Option<usize> {
    (0..trace.len()).min_by(|&a, &b| (trace.times[a] - t).abs().total_cmp(&(trace.times[b] - t).abs()))
}

/// Distance distortion of material point pairs over snapshot windows.
///
/// Pairs are given in material coordinates (their position at the start of
/// the run) and followed through regrids by their labels.
pub fn distortion_ledger(
    trace: &FlowTrace,
    pairs: &[(MeridianPoint, MeridianPoint)],
    windows: &[(usize, usize)],
) -> Result<Vec<LedgerEntry>> {
    let len = trace.len();
    if trace.profiles.len() != len {
        return Err(LabError::Refused("trace carries no profiles".into()));
    }
    if let Some(&(a, b)) = windows.iter().find(|&&(a, b)| a >= len || b >= len || a > b) {
        return Err(LabError::Refused(format!("window ({a}, {b}) invalid for {len} snapshots")));
    }
    let mut needed: Vec<usize> = windows.iter().flat_map(|&(a, b)| [a, b]).collect();
    needed.sort_unstable();
    needed.dedup();
    let distances: Vec<Vec<(f64, bool)>> = needed
        .par_iter()
        .map(|&k| {
            let profile = &trace.profiles[k];
            let surface = MeridianSurface::new(profile);
            let at = |m: &MeridianPoint| MeridianPoint::new(position_of_label(profile, m.x), m.angle);
            pairs
                .iter()
                .map(|(u, v)| {
                    let d = surface.distance(at(u), at(v));
                    (d.length, d.reduced_accuracy())
                })
                .collect()
        })
        .collect();
    let lookup = |k: usize| &distances[needed.binary_search(&k).unwrap()];
    let int_p = cumulative_trapezoid(&trace.p_series(), &trace.times);

    let mut out = Vec::with_capacity(pairs.len() * windows.len());
    for (pair, _) in pairs.iter().enumerate() {
        for &(a, b) in windows {
            let (d_a, fa) = lookup(a)[pair];
            let (d_b, fb) = lookup(b)[pair];
            let log_ratio = (d_b / d_a).ln().abs();
            let ip = int_p[b] - int_p[a];
            let margin = ip - log_ratio;
            out.push(LedgerEntry {
                pair,
                index_a: a,
                index_b: b,
                t_a: trace.times[a],
                t_b: trace.times[b],
                d_a,
                d_b,
                log_ratio,
                int_p: ip,
                margin,
                pass: margin >= -LEDGER_TOL,
                fallback: fa || fb,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{run, FlowStatus, Scenario};
    use crate::geometry::round_sphere;

    #[test]
    fn static_trace_has_zero_distortion() {
        let profiles: Vec<_> = (0..3)
            .map(|k| {
                let mut p = round_sphere(3, 1.0, 100);
                p.time = k as f64;
                (p, 0)
            })
            .collect();
        let mut trace = FlowTrace::from_snapshots(profiles, FlowStatus::Completed).unwrap();
        for f in trace.functionals.iter_mut() {
            f.p = 0.0;
        }
        let pair = (MeridianPoint::new(0.2, 0.0), MeridianPoint::new(0.7, 1.0));
        let rows = distortion_ledger(&trace, &[pair], &consecutive_windows(&trace, 1)).unwrap();
        assert_eq!(rows.len(), 2);
        for r in rows {
            assert_eq!(r.log_ratio, 0.0);
            assert_eq!(r.int_p, 0.0);
            assert!(r.pass);
        }
    }

    #[test]
    fn labels_invert() {
        let mut p = round_sphere(3, 1.0, 50);
        p.material = p.grid.iter().map(|x| x * x * (3.0 - 2.0 * x)).collect();
        for x in [0.0, 0.13, 0.5, 0.77, 1.0] {
            let back = position_of_label(&p, material_of(&p, x));
            assert!((back - x).abs() < 1e-12, "{x} {back}");
        }
    }

    #[test]
    fn sphere_poles_shrink_with_radius() {
        let mut s = Scenario::round_sphere(3, 1.0);
        s.stop_q_ratio = 5.0;
        let trace = run(&s).unwrap();
        let end = nearest_snapshot(&trace, 3.0 / 16.0).unwrap();
        let pair = (MeridianPoint::new(0.0, 0.0), MeridianPoint::new(1.0, 0.0));
        let rows = distortion_ledger(&trace, &[pair], &[(0, end)]).unwrap();
        let r = rows[0];
        let exact = 0.5 * (1.0 - 4.0 * r.t_b).ln().abs();
        assert!((r.log_ratio - exact).abs() < 1e-3, "{} {exact}", r.log_ratio);
        assert!(r.pass);
        assert!(consecutive_windows(&trace, 7).iter().all(|w| w.1 > w.0));
    }
}
