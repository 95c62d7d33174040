use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::flow::FlowTrace;
use crate::geometry::{ball_volume, MeridianPoint};

/// Volume-ratio estimates `κ̂ = Vol B(x*, r*)/r*ⁿ` at the curvature peak.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaSeries {
    /// Snapshot indices that were evaluated.
    pub index: Vec<usize>,
    pub t: Vec<f64>,
    /// `r* = min(Q^{−1/2}, diameter/2)`.
    pub radius: Vec<f64>,
    /// `None` where the quadrature failed and the snapshot was skipped.
    pub kappa: Vec<Option<f64>>,
    /// Running minimum of the evaluated `κ̂`.
    pub running_min: Vec<f64>,
}

impl KappaSeries {
    pub fn min(&self) -> Option<f64> {
        self.running_min.last().copied().filter(|m| m.is_finite())
    }

    pub fn skipped(&self) -> usize {
        self.kappa.iter().filter(|k| k.is_none()).count()
    }
}

/// `κ̂` at every snapshot.
pub fn kappa_monitor(trace: &FlowTrace) -> KappaSeries {
    kappa_monitor_strided(trace, 1)
}

/// `κ̂` at every `stride`-th snapshot, always including the last one.
/// Ball volumes are the expensive part, so snapshots run in parallel.
pub fn kappa_monitor_strided(trace: &FlowTrace, stride: usize) -> KappaSeries {
    let stride = stride.max(1);
    let len = trace.profiles.len();
    let mut index: Vec<usize> = (0..len).step_by(stride).collect();
    if len > 0 && index.last() != Some(&(len - 1)) {
        index.push(len - 1);
    }
    let evaluated: Vec<(f64, Option<f64>)> = index
        .par_iter()
        .map(|&k| {
            let profile = &trace.profiles[k];
            let f = &trace.functionals[k];
            let radius = (1.0 / f.q.sqrt()).min(0.5 * f.diameter);
            let center = MeridianPoint::new(profile.grid[f.argmax_rm], 0.0);
            let kappa = ball_volume(profile, center, radius)
                .ok()
                .map(|b| b.volume / radius.powi(profile.n as i32))
                .filter(|k| k.is_finite() && *k > 0.0);
            (radius, kappa)
        })
        .collect();
    let mut running_min = Vec::with_capacity(index.len());
    let mut m = f64::INFINITY;
    for (_, k) in &evaluated {
        if let Some(k) = k {
            m = m.min(*k);
        }
        running_min.push(m);
    }
    KappaSeries {
        t: index.iter().map(|&k| trace.times[k]).collect(),
        index,
        radius: evaluated.iter().map(|e| e.0).collect(),
        kappa: evaluated.iter().map(|e| e.1).collect(),
        running_min,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{run, Scenario};

    #[test]
    fn sphere_initial_value_matches_cap_volume() {
        let mut s = Scenario::round_sphere(3, 1.0);
        s.max_steps = 0;
        let series = kappa_monitor(&run(&s).unwrap());
        let rho = 12f64.powf(-0.25);
        let exact = 2.0 * std::f64::consts::PI * (rho - rho.sin() * rho.cos()) / rho.powi(3);
        assert!((series.radius[0] - rho).abs() < 1e-3);
        let k = series.kappa[0].unwrap();
        assert!((k - exact).abs() < 0.01 * exact, "{k} vs {exact}");
        assert_eq!(series.min(), Some(k));
        assert_eq!(series.skipped(), 0);
    }

    #[test]
    fn stride_keeps_last_snapshot() {
        let mut s = Scenario::round_sphere(3, 1.0);
        s.max_steps = 45;
        s.output_stride = 5;
        let trace = run(&s).unwrap();
        let series = kappa_monitor_strided(&trace, 4);
        assert_eq!(series.index, vec![0, 4, 8, 9]);
    }
}
