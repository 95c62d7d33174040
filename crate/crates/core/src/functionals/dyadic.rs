use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::flow::FlowTrace;

/// One curvature doubling `[sᵢ, sᵢ₊₁]` with `Q(sᵢ) = 2ⁱ·Q(t₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicLevel {
    pub i: u32,
    pub s_i: f64,
    pub s_next: f64,
    /// `∫_{sᵢ}^{sᵢ₊₁} P dt`.
    pub integral: f64,
}

/// Times at which `sup|Rm|` first reaches `2ⁱ·Q(t₀)`, with `∫P dt` between
/// consecutive ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicDecomposition {
    pub t0: f64,
    /// `Q(t₀)`, log-linearly interpolated.
    pub q_base: f64,
    pub levels: Vec<DyadicLevel>,
    /// Smallest level integral; `None` when `Q` never doubles. An empirical
    /// per-run statistic, not a universal constant.
    pub epsilon_hat: Option<f64>,
    pub warning: Option<String>,
}

impl DyadicDecomposition {
    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

/// Value at `t` of a positive series interpolated linearly in `log v`.
/// Falls back to linear interpolation when an endpoint is not positive.
pub fn log_interp(times: &[f64], v: &[f64], t: f64) -> f64 {
    let k = times.partition_point(|&s| s < t);
    if k == 0 {
        return v[0];
    }
    if k == times.len() {
        return v[k - 1];
    }
    let w = (t - times[k - 1]) / (times[k] - times[k - 1]);
    if v[k - 1] > 0.0 && v[k] > 0.0 {
        (v[k - 1].ln() * (1.0 - w) + v[k].ln() * w).exp()
    } else {
        v[k - 1] * (1.0 - w) + v[k] * w
    }
}

/// `∫_a^b P dt` by the trapezoid rule over the snapshots inside `(a, b)`,
/// with end values interpolated log-linearly.
pub(crate) fn integrate_p(times: &[f64], p: &[f64], a: f64, b: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let mut prev = (a, log_interp(times, p, a));
    let mut acc = 0.0;
    let first = times.partition_point(|&s| s <= a);
    for k in first..times.len() {
        if times[k] >= b {
            break;
        }
        acc += 0.5 * (times[k] - prev.0) * (p[k] + prev.1);
        prev = (times[k], p[k]);
    }
    acc + 0.5 * (b - prev.0) * (log_interp(times, p, b) + prev.1)
}

/// Dyadic decomposition of the trace after `t0`.
///
/// Crossing times come from inverse interpolation of `log₂ Q`; each is the
/// first time after the previous crossing where the next level is reached.
pub fn dyadic_decompose(trace: &FlowTrace, t0: f64) -> DyadicDecomposition {
    let times = &trace.times;
    let q = trace.q_series();
    let p = trace.p_series();
    let empty = |q_base: f64, why: String| DyadicDecomposition {
        t0,
        q_base,
        levels: Vec::new(),
        epsilon_hat: None,
        warning: Some(why),
    };
    if times.is_empty() {
        return empty(f64::NAN, "empty trace".into());
    }
    let q_base = log_interp(times, &q, t0);
    if !(q_base > 0.0) {
        return empty(q_base, format!("Q(t0) = {q_base} is not positive"));
    }
    let level = |k: usize| (q[k] / q_base).log2();

    let mut crossings = vec![t0];
    let mut k = times.partition_point(|&s| s <= t0);
    let mut prev = (t0, 0.0);
    while k < times.len() {
        let target = crossings.len() as f64;
        let lk = level(k);
        if lk >= target {
            let w = if lk > prev.1 { (target - prev.1) / (lk - prev.1) } else { 1.0 };
            let s = prev.0 + w.clamp(0.0, 1.0) * (times[k] - prev.0);
            crossings.push(s);
            prev = (s, target);
            // the same snapshot may cross several levels
            continue;
        }
        prev = (times[k], lk);
        k += 1;
    }
    if crossings.len() < 2 {
        return empty(q_base, format!("Q never doubles after t0 = {t0}"));
    }
    let levels: Vec<DyadicLevel> = crossings
        .windows(2)
        .enumerate()
        .map(|(i, w)| DyadicLevel {
            i: i as u32,
            s_i: w[0],
            s_next: w[1],
            integral: integrate_p(times, &p, w[0], w[1]),
        })
        .collect();
    let epsilon_hat = levels.iter().map(|l| l.integral).reduce(f64::min);
    DyadicDecomposition {
        t0,
        q_base,
        levels,
        epsilon_hat,
        warning: None,
    }
}

/// Outcome of the counting bound `Q(K)/Q(t₀) ≤ 2^{∫_{t₀}^K P dt / ε̂ + 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublingVerdict {
    pub pass: bool,
    /// Smallest `(∫P/ε̂ + 1) − log₂(Q(K)/Q(t₀))` over the checked snapshots.
    pub min_slack_log2: f64,
    /// Snapshot index where the smallest slack occurs.
    pub worst_index: usize,
    pub checked: usize,
}

/// Checks the counting bound at every snapshot after `t₀`, using the stored
/// `Q(t₀)` and `ε̂` of the decomposition and the `Q`, `P` of the trace.
pub fn doubling_bound_check(trace: &FlowTrace, decomposition: &DyadicDecomposition) -> Result<DoublingVerdict> {
    let Some(eps) = decomposition.epsilon_hat.filter(|e| *e > 0.0) else {
        return Err(LabError::Refused("empty dyadic decomposition".into()));
    };
    let times = &trace.times;
    let p = trace.p_series();
    let t0 = decomposition.t0;
    let mut verdict = DoublingVerdict {
        pass: true,
        min_slack_log2: f64::INFINITY,
        worst_index: 0,
        checked: 0,
    };
    let mut integral = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (k, f) in trace.functionals.iter().enumerate() {
        if times[k] <= t0 {
            continue;
        }
        integral += match prev {
            None => integrate_p(times, &p, t0, times[k]),
            Some((tp, pp)) => 0.5 * (times[k] - tp) * (pp + p[k]),
        };
        prev = Some((times[k], p[k]));
        let slack = integral / eps + 1.0 - (f.q / decomposition.q_base).log2();
        verdict.checked += 1;
        if !(slack >= verdict.min_slack_log2) {
            verdict.min_slack_log2 = slack;
            verdict.worst_index = k;
        }
    }
    verdict.pass = verdict.checked > 0 && verdict.min_slack_log2 > 0.0;
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::singular_time::tests::synthetic_q;

    #[test]
    fn exponential_growth_has_equal_levels() {
        // Q = P = e^t: doublings every ln 2, level i integrates to 2^i
        let times: Vec<f64> = (0..=4000).map(|k| k as f64 * 1e-3).collect();
        let trace = synthetic_q(&times, f64::exp);
        let d = dyadic_decompose(&trace, 0.0);
        assert_eq!(d.levels.len(), 5);
        for l in &d.levels {
            assert!((l.s_i - l.i as f64 * 2f64.ln()).abs() < 1e-9);
            let exact = (l.s_next.exp() - l.s_i.exp()).abs();
            assert!((l.integral - exact).abs() < 1e-6 * exact);
        }
        assert!((d.epsilon_hat.unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn constant_curvature_gives_empty() {
        let times: Vec<f64> = (0..20).map(|k| k as f64).collect();
        let d = dyadic_decompose(&synthetic_q(&times, |_| 3.0), 0.0);
        assert!(d.is_empty());
        assert!(d.warning.is_some());
        assert!(d.epsilon_hat.is_none());
        assert!(doubling_bound_check(&synthetic_q(&times, |_| 3.0), &d).is_err());
    }

    #[test]
    fn one_jump_crosses_several_levels() {
        let trace = synthetic_q(&[0.0, 1.0, 2.0], |t| if t < 1.5 { 1.0 } else { 16.0 });
        let d = dyadic_decompose(&trace, 0.0);
        assert_eq!(d.levels.len(), 4);
        for w in d.levels.windows(2) {
            assert!(w[1].s_i > w[0].s_i);
        }
    }

    #[test]
    fn single_level_bound() {
        let times: Vec<f64> = (0..=100).map(|k| k as f64 * 0.01).collect();
        let trace = synthetic_q(&times, |t| 1.0 + 1.5 * t);
        let d = dyadic_decompose(&trace, 0.0);
        assert_eq!(d.levels.len(), 1);
        let v = doubling_bound_check(&trace, &d).unwrap();
        assert!(v.pass);
        assert!(v.min_slack_log2 > 0.0);
    }

    #[test]
    fn interpolation_is_log_linear() {
        let t = [0.0, 1.0];
        let v = [1.0, 4.0];
        assert!((log_interp(&t, &v, 0.5) - 2.0).abs() < 1e-12);
        assert_eq!(log_interp(&t, &v, -1.0), 1.0);
        assert_eq!(log_interp(&t, &v, 3.0), 4.0);
    }
}
