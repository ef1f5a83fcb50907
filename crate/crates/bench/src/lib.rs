//! Inputs shared by the benchmarks.

use aggrekin::{AggregateState, Grid1D, GridField};

/// Two-Gaussian density on `n` cells of `[-22, 22]`.
pub fn two_gauss_density(n: usize) -> GridField {
    let grid = Grid1D::new(-22.0, 22.0, n).expect("valid grid");
    GridField::from_fn(grid, |x| (-20.0 * (x - 0.5) * (x - 0.5)).exp() + (-20.0 * (x + 0.5) * (x + 0.5)).exp())
        .expect("finite density")
}

/// `n` evenly spaced aggregates on `[-2, 2]` with alternating masses.
pub fn aggregate_line(n: usize) -> AggregateState {
    let y = (0..n).map(|i| -2.0 + 4.0 * i as f64 / (n.max(2) - 1) as f64).collect();
    let m = (0..n).map(|i| if i % 2 == 0 { 1e-3 } else { 2e-3 }).collect();
    AggregateState::new(0.0, y, m).expect("valid state")
}
