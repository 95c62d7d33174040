use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::flow::FlowTrace;

/// `Â₀` over one window ending at snapshot `index`.
///
/// After parabolic rescaling by `Q(t_e)` the window is `[−1/8, 0]` and
/// `Â₀ = P̃(0)/√(sup Õ) = P(t_e)/(√Q(t_e)·√(sup O))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoserEstimate {
    pub index: usize,
    pub t_end: f64,
    pub t_start: f64,
    pub q_end: f64,
    pub p_end: f64,
    /// `sup O` over the snapshots in the window.
    pub sup_o: f64,
    pub a0: f64,
}

/// `Â₀` for the window `[t_e − 1/(8Q(t_e)), t_e]`, `t_e` the time of
/// snapshot `end`.
pub fn moser_check(trace: &FlowTrace, end: usize) -> Result<MoserEstimate> {
    let Some(f) = trace.functionals.get(end) else {
        return Err(LabError::Refused(format!("no snapshot {end}")));
    };
    if !(f.q > 0.0) {
        return Err(LabError::Refused(format!("Q = {} at the window end", f.q)));
    }
    let t_start = f.t - 1.0 / (8.0 * f.q);
    if t_start < trace.times[0] {
        return Err(LabError::Refused(format!(
            "window [{t_start}, {}] starts before the trace",
            f.t
        )));
    }
    let first = trace.times.partition_point(|&t| t < t_start);
    let sup_o = trace.functionals[first..=end].iter().map(|g| g.o).fold(0.0, f64::max);
    let a0 = if f.p == 0.0 { 0.0 } else { f.p / (f.q.sqrt() * sup_o.sqrt()) };
    Ok(MoserEstimate {
        index: end,
        t_end: f.t,
        t_start,
        q_end: f.q,
        p_end: f.p,
        sup_o,
        a0,
    })
}

/// `Â₀` at every `stride`-th snapshot whose window fits in the trace.
pub fn moser_windows(trace: &FlowTrace, stride: usize) -> Vec<MoserEstimate> {
    (0..trace.len())
        .rev()
        .step_by(stride.max(1))
        .filter_map(|k| moser_check(trace, k).ok())
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{run, Scenario};

    #[test]
    fn sphere_value() {
        let mut s = Scenario::round_sphere(3, 1.0);
        s.stop_q_ratio = 4.0;
        let trace = run(&s).unwrap();
        let est = moser_windows(&trace, 25);
        assert!(!est.is_empty());
        let exact = 2.0 * 3f64.sqrt() / (12f64.powf(0.25) * 6f64.sqrt());
        for e in &est {
            assert!((e.a0 - exact).abs() < 1e-3 * exact, "{e:?}");
        }
        assert!(moser_check(&trace, 0).is_err());
        assert_eq!(est.last().unwrap().index, trace.len() - 1);
    }

    #[test]
    fn rescaling_invariance() {
        let mut s = Scenario::round_sphere(3, 1.0);
        s.stop_q_ratio = 3.0;
        let trace = run(&s).unwrap();
        let big = trace.rescaled(2.0).unwrap();
        let (a, b) = (moser_windows(&trace, 40), moser_windows(&big, 40));
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x.a0 - y.a0).abs() < 1e-6 * x.a0);
        }
    }
}
