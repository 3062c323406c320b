//! Shared fixtures for the criterion benchmarks in `benches/`.

use sectio::bodies::{ellipsoid, lp_ball, StarBody};
use sectio::Direction;

/// `B_1^n`, `B_4^n` and an ellipsoid: a kinked, a flat and a smooth body.
pub fn bodies(n: usize) -> Vec<StarBody> {
    let axes = [1.3, 0.8, 1.1, 0.7, 1.2, 0.9];
    vec![
        lp_ball(n, 1.0).expect("valid exponent"),
        lp_ball(n, 4.0).expect("valid exponent"),
        ellipsoid(&axes[..n]).expect("positive axes"),
    ]
}

/// Fixed off-axis direction.
pub fn direction(n: usize) -> Direction {
    Direction::normalized((1..=n).map(|i| 1.0 / i as f64).collect()).expect("nonzero")
}
