//! Physical parameters, unit conventions and the dressed-state change of basis.
//!
//! Rates and frequencies are measured in units of the total upper-state decay
//! rate. The 3→1 transition frequency is the energy origin, so a detuning
//! `delta = omega - omega31` is numerically the emitted frequency and the
//! 3→2 line sits at `delta = -omega21`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Flat vacuum density of states that makes `|g|^2 = gamma1`.
pub const DEFAULT_DENSITY: f64 = 1.0 / (2.0 * PI);

/// Parameters of the driven Lambda system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Decay rate |3> -> |1>.
    pub gamma1: f64,
    /// Decay rate |3> -> |2>.
    pub gamma2: f64,
    /// Lower-doublet splitting `omega2 - omega1`.
    pub omega21: f64,
    /// Magnitude of the quantized drive coupling.
    pub gbar_mag: f64,
    /// Phase of the quantized drive coupling (radians).
    pub phi: f64,
    /// Phase of the vacuum coupling on the 3 -> 1 transition.
    pub phi_g: f64,
    /// Phase of the vacuum coupling on the 3 -> 2 transition.
    pub phi_ghat: f64,
    /// Vacuum density of states, flat over the emission band.
    pub density: f64,
    /// Parallel dipoles (`true`) or orthogonal dipoles with no cross terms.
    pub interference: bool,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            gamma1: 0.5,
            gamma2: 0.5,
            omega21: 1.0,
            gbar_mag: 0.0,
            phi: 0.0,
            phi_g: 0.0,
            phi_ghat: 0.0,
            density: DEFAULT_DENSITY,
            interference: true,
        }
    }
}

impl SystemParams {
    pub fn new(gamma1: f64, gamma2: f64, omega21: f64, gbar_mag: f64) -> Result<Self> {
        let params = Self {
            gamma1,
            gamma2,
            omega21,
            gbar_mag,
            ..Self::default()
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_vacuum_phases(mut self, phi_g: f64, phi_ghat: f64) -> Self {
        self.phi_g = phi_g;
        self.phi_ghat = phi_ghat;
        self
    }

    pub fn with_interference(mut self, on: bool) -> Self {
        self.interference = on;
        self
    }

    pub fn with_gbar(mut self, gbar_mag: f64) -> Self {
        self.gbar_mag = gbar_mag;
        self
    }

    /// Total upper-state decay rate.
    pub fn gamma(&self) -> f64 {
        self.gamma1 + self.gamma2
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.gamma1,
            self.gamma2,
            self.omega21,
            self.gbar_mag,
            self.phi,
            self.phi_g,
            self.phi_ghat,
            self.density,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("non-finite parameter".into()));
        }
        if self.gamma1 < 0.0 || self.gamma2 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "decay rates must be non-negative (gamma1 = {}, gamma2 = {})",
                self.gamma1, self.gamma2
            )));
        }
        if self.gamma() <= 0.0 {
            return Err(Error::InvalidParameter(
                "total decay rate must be positive".into(),
            ));
        }
        if self.omega21 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "omega21 must be non-negative, got {}",
                self.omega21
            )));
        }
        if self.gbar_mag < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "drive coupling magnitude must be non-negative, got {}",
                self.gbar_mag
            )));
        }
        if self.density <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "density of states must be positive, got {}",
                self.density
            )));
        }
        Ok(())
    }
}

/// Detunings `(delta, delta_hat)` of an emitted frequency from the 3→1 and
/// 3→2 transitions.
pub fn detunings(omega: f64, params: &SystemParams) -> (f64, f64) {
    (omega, omega + params.omega21)
}

/// Vacuum couplings `(g, ghat)` reproducing the configured partial rates.
pub fn couplings_from_rates(params: &SystemParams) -> Result<(Complex64, Complex64)> {
    params.validate()?;
    let scale = 2.0 * PI * params.density;
    let g = Complex64::from_polar((params.gamma1 / scale).sqrt(), params.phi_g);
    let ghat = Complex64::from_polar((params.gamma2 / scale).sqrt(), params.phi_ghat);
    Ok((g, ghat))
}

/// Partial decay rates `(gamma1, gamma2)` for given coupling magnitudes.
pub fn rates_from_couplings(g_mag: f64, ghat_mag: f64, density: f64) -> (f64, f64) {
    let scale = 2.0 * PI * density;
    (scale * g_mag * g_mag, scale * ghat_mag * ghat_mag)
}

/// Bare amplitudes `(x, y)` of `|1,n+1>` and `|2,n>` to dressed amplitudes
/// `(plus, minus)`, with `|±,n> = (|1,n+1> ± i e^{i phi} |2,n>) / sqrt 2`.
pub fn dressed_transform(x_amp: Complex64, y_amp: Complex64, phi: f64) -> (Complex64, Complex64) {
    // <±| picks up the conjugate of the |2,n> coefficient.
    let rotated = Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, -phi) * y_amp;
    (
        (x_amp + rotated) * FRAC_1_SQRT_2,
        (x_amp - rotated) * FRAC_1_SQRT_2,
    )
}

/// Inverse of [`dressed_transform`].
pub fn inverse_dressed_transform(
    plus_amp: Complex64,
    minus_amp: Complex64,
    phi: f64,
) -> (Complex64, Complex64) {
    let x = (plus_amp + minus_amp) * FRAC_1_SQRT_2;
    let y = Complex64::new(0.0, 1.0)
        * Complex64::from_polar(1.0, phi)
        * (plus_amp - minus_amp)
        * FRAC_1_SQRT_2;
    (x, y)
}

/// Uniform detuning grid `lo..=hi` with `count` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    lo: f64,
    hi: f64,
    count: usize,
}

impl FrequencyGrid {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::InvalidParameter(format!(
                "grid bounds must satisfy lo < hi (got {lo}, {hi})"
            )));
        }
        if count < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least two samples, got {count}"
            )));
        }
        Ok(Self { lo, hi, count })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.count - 1) as f64
    }

    /// Detuning of sample `i`.
    pub fn at(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.hi
        } else {
            self.lo + i as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.at(i))
    }

    /// Same bounds and sample count up to rounding.
    pub fn matches(&self, other: &FrequencyGrid) -> bool {
        let tol = 1e-12 * (self.hi - self.lo).abs().max(1.0);
        self.count == other.count
            && (self.lo - other.lo).abs() <= tol
            && (self.hi - other.hi).abs() <= tol
    }
}
