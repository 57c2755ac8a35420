//! Spontaneous-emission spectra of a three-level Lambda atom whose lower
//! doublet is driven by a quantized field mode.
//!
//! The fast path ([`spectral`]) splits the driven ground manifold into closed
//! two-state blocks and evaluates their steady state in closed form. The
//! [`timedomain`] module integrates the same equations numerically and, one
//! level further down, couples the upper state to a discretized vacuum.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod field;
pub mod model;
pub mod spectral;
pub mod spectrum;
pub mod timedomain;
pub mod verify;

pub use error::{Error, Result};
pub use field::FieldState;
pub use model::{
    couplings_from_rates, detunings, dressed_transform, inverse_dressed_transform,
    rates_from_couplings, FrequencyGrid, SystemParams,
};
pub use spectral::{build_blocks, solve_block_steady, steady_amplitudes, Block, SteadyAmplitudes};
pub use spectrum::{
    assemble_spectrum, classical_reference_spectrum, compare_spectra, dip_metric,
    phase_averaged_spectrum, quantum_spectrum, restricted_spectrum, ComparisonReport, Spectrum,
};
pub use timedomain::{
    full_bath_simulate, integrate_bare, upper_state_amplitude, BareAmplitudes, BathConfig, BathRun,
    IntegratorConfig,
};
