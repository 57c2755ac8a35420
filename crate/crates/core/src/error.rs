use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Coherent-state truncation discarded more probability than allowed.
    #[error("truncation discards probability {discarded:e} (limit {limit:e})")]
    Truncation { discarded: f64, limit: f64 },

    /// Input outside the domain of an operation (missing block, empty window, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural constraint on a field state was violated.
    #[error("constraint violated: {0}")]
    Constraint(String),

    /// Two spectra were sampled on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Time integration did not reach a stationary state.
    #[error(
        "no stationary state: detuning {detuning}, block {block}, magnitude drift {drift:e} (tolerance {tolerance:e})"
    )]
    NonConvergence {
        detuning: f64,
        block: i64,
        drift: f64,
        tolerance: f64,
    },

    /// Inconsistent simulation setup (step size, recurrence horizon, ...).
    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
