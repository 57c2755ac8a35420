//! Shared inputs for the benchmarks.

use lamspec_core::{FieldState, FrequencyGrid, SystemParams};

/// Grid used by the reproduction runs.
pub fn wide_grid() -> FrequencyGrid {
    FrequencyGrid::new(-40.0, 40.0, 4001).expect("static grid")
}

/// Coherent drive with `|Omega| = 5` at mean photon number `alpha^2`.
pub fn coherent_drive(alpha: f64) -> (FieldState, SystemParams) {
    let state = FieldState::coherent(alpha, 0.0, lamspec_core::field::DEFAULT_SIGMAS)
        .expect("valid amplitude");
    (state, SystemParams::default().with_gbar(5.0 / alpha))
}
