//! Shared fixtures for the benchmarks in `benches/`.

use rflab_core::flow::DumbbellParams;
use rflab_core::{initial_profile, FiniteMetricSpace, Scenario, WarpedProfile};

/// A 4-dimensional dumbbell with a thin neck on `grid_n` intervals.
pub fn dumbbell(grid_n: usize) -> WarpedProfile {
    let mut s = Scenario::dumbbell(
        4,
        DumbbellParams {
            neck: 0.2,
            ..DumbbellParams::default()
        },
    );
    s.grid_n = grid_n;
    initial_profile(&s).expect("benchmark scenario is valid")
}

/// Points on a line at the given coordinates, base point first.
pub fn line_space(coords: &[f64]) -> FiniteMetricSpace {
    let dist = coords
        .iter()
        .map(|a| coords.iter().map(|b| (a - b).abs()).collect())
        .collect();
    FiniteMetricSpace::new(dist, 0).expect("line distances form a metric")
}
