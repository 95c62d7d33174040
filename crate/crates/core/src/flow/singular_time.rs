use serde::{Deserialize, Serialize};

use super::FlowTrace;
use crate::error::{LabError, Result};

/// Snapshots required inside the last decade of `Q`.
pub const MIN_FIT_POINTS: usize = 10;

/// Type-I fit of the singular time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularTimeEstimate {
    /// Zero of the least-squares line through `(t, 1/Q)`.
    pub t_hat: f64,
    /// RMS misfit of `1/Q` divided by the RMS of `1/Q` over the window.
    pub residual: f64,
    /// `t_last + 1/(8·Q(t_last))`, a lower bound on the singular time when
    /// `Q(t) ≥ 1/(8(T−t))`.
    pub lower_bound: f64,
    /// First snapshot index of the fit window.
    pub window_start: usize,
}

/// Fits `1/Q(t) ≈ a + b·t` over the last decade of `Q` (the trailing
/// snapshots with `Q ≥ Q_last/10`) and returns the intercept `T̂ = −a/b`.
pub fn estimate_singular_time(trace: &FlowTrace) -> Result<SingularTimeEstimate> {
    let q = trace.q_series();
    let Some(&q_last) = q.last() else {
        return Err(LabError::Refused("empty trace".into()));
    };
    let q_min = q.iter().copied().fold(f64::INFINITY, f64::min);
    if !(q_last >= 10.0 * q_min) {
        return Err(LabError::Refused(format!(
            "curvature grew by {:.3}x, less than one decade",
            q_last / q_min
        )));
    }
    let mut start = q.len() - 1;
    while start > 0 && q[start - 1] >= q_last / 10.0 {
        start -= 1;
    }
    let count = q.len() - start;
    if count < MIN_FIT_POINTS {
        return Err(LabError::Refused(format!(
            "{count} snapshots in the last decade, need {MIN_FIT_POINTS}"
        )));
    }
    let ts = &trace.times[start..];
    let ys: Vec<f64> = q[start..].iter().map(|v| 1.0 / v).collect();
    let k = count as f64;
    let t_mean = ts.iter().sum::<f64>() / k;
    let y_mean = ys.iter().sum::<f64>() / k;
    let (mut stt, mut sty) = (0.0, 0.0);
    for (t, y) in ts.iter().zip(&ys) {
        stt += (t - t_mean) * (t - t_mean);
        sty += (t - t_mean) * (y - y_mean);
    }
    let slope = sty / stt;
    if !(slope < 0.0) {
        return Err(LabError::Refused("1/Q is not decreasing over the last decade".into()));
    }
    let intercept = y_mean - slope * t_mean;
    let misfit = ts
        .iter()
        .zip(&ys)
        .map(|(t, y)| (y - intercept - slope * t).powi(2))
        .sum::<f64>();
    let scale = ys.iter().map(|y| y * y).sum::<f64>();
    let t_last = *ts.last().unwrap();
    Ok(SingularTimeEstimate {
        t_hat: -intercept / slope,
        residual: (misfit / scale).sqrt(),
        lower_bound: t_last + 1.0 / (8.0 * q_last),
        window_start: start,
    })
}
