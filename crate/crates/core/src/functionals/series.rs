use serde::{Deserialize, Serialize};

use crate::flow::FlowTrace;

/// Exponents of the `Q·(T̂−t)^λ` tracker used when none are given.
pub const DEFAULT_LAMBDAS: [f64; 3] = [1.0, 1.5, 2.0];

/// Per-snapshot curvature sup-norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSeries {
    pub n: usize,
    pub t: Vec<f64>,
    /// `sup|R|`.
    pub o: Vec<f64>,
    /// `sup|Ric|`.
    pub p: Vec<f64>,
    /// `sup|Rm|`.
    pub q: Vec<f64>,
    /// `sup|Ric₋|`.
    pub p_minus: Vec<f64>,
    /// Filled by [`FunctionalSeries::with_t_hat`].
    pub blowup: Option<BlowupProducts>,
}

/// Products of the sup-norms with powers of `T̂ − t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupProducts {
    pub t_hat: f64,
    pub tq: Vec<f64>,
    pub tp: Vec<f64>,
    pub to: Vec<f64>,
    pub t_sqrt_oq: Vec<f64>,
    pub tp_minus: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// `q_lambda[j][k] = Q(t_k)·(T̂ − t_k)^{λ_j}`.
    pub q_lambda: Vec<Vec<f64>>,
}

/// Node-wise maxima of every snapshot's curvature field.
pub fn sup_norms(trace: &FlowTrace) -> FunctionalSeries {
    let f = &trace.functionals;
    FunctionalSeries {
        n: trace.dimension(),
        t: trace.times.clone(),
        o: f.iter().map(|s| s.o).collect(),
        p: f.iter().map(|s| s.p).collect(),
        q: f.iter().map(|s| s.q).collect(),
        p_minus: f.iter().map(|s| s.p_minus).collect(),
        blowup: None,
    }
}

impl FunctionalSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Adds the `(T̂ − t)` products. Snapshots at or after `T̂` get
    /// non-positive products; callers restrict to `t < T̂`.
    pub fn with_t_hat(mut self, t_hat: f64, lambdas: &[f64]) -> Self {
        let gap: Vec<f64> = self.t.iter().map(|t| t_hat - t).collect();
        let times = |v: &[f64]| -> Vec<f64> { v.iter().zip(&gap).map(|(a, g)| a * g).collect() };
        let t_sqrt_oq = self
            .o
            .iter()
            .zip(&self.q)
            .zip(&gap)
            .map(|((o, q), g)| (o * q).sqrt() * g)
            .collect();
        let q_lambda = lambdas
            .iter()
            .map(|&l| self.q.iter().zip(&gap).map(|(q, g)| q * g.max(0.0).powf(l)).collect())
            .collect();
        self.blowup = Some(BlowupProducts {
            t_hat,
            tq: times(&self.q),
            tp: times(&self.p),
            to: times(&self.o),
            t_sqrt_oq,
            tp_minus: times(&self.p_minus),
            lambdas: lambdas.to_vec(),
            q_lambda,
        });
        self
    }
}

/// First index of the trailing run of snapshots with `Q ≥ Q_last/10`.
pub fn last_decade_start(q: &[f64]) -> usize {
    let Some(&last) = q.last() else { return 0 };
    let mut start = q.len() - 1;
    while start > 0 && q[start - 1] >= last / 10.0 {
        start -= 1;
    }
    start
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{run, Scenario};

    #[test]
    fn sphere_initial_norms() {
        let mut s = Scenario::round_sphere(3, 1.0);
        s.max_steps = 0;
        let series = sup_norms(&run(&s).unwrap());
        assert!((series.o[0] - 6.0).abs() < 1e-3);
        assert!((series.p[0] - 2.0 * 3f64.sqrt()).abs() < 1e-3);
        assert!((series.q[0] - 12f64.sqrt()).abs() < 1e-3);
        assert!(series.p_minus[0] < 1e-3);
    }

    #[test]
    fn products_use_the_supplied_time() {
        let mut s = Scenario::round_sphere(3, 1.0);
        s.max_steps = 50;
        let series = sup_norms(&run(&s).unwrap()).with_t_hat(0.25, &DEFAULT_LAMBDAS);
        let b = series.blowup.as_ref().unwrap();
        for k in 0..series.len() {
            assert!((b.tq[k] - 12f64.sqrt() / 4.0).abs() < 1e-3 * 0.866);
            assert!((b.q_lambda[0][k] - b.tq[k]).abs() < 1e-12);
            assert!((b.to[k] - 1.5).abs() < 2e-3);
        }
    }

    #[test]
    fn decade_start() {
        assert_eq!(last_decade_start(&[1.0, 2.0, 3.0, 20.0, 40.0]), 3);
        assert_eq!(last_decade_start(&[3.0, 4.0]), 0);
        assert_eq!(last_decade_start(&[]), 0);
    }
}
