//! Initial states of the driving-field mode.
//!
//! A [`FieldState`] holds the photon-number amplitudes of the upper atomic
//! state at `t = 0` on a contiguous window `n_min..=n_max`. Unpopulated
//! numbers inside the window carry an exact zero.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norm tolerance for the exactly normalized families.
pub const NORM_TOLERANCE: f64 = 1e-10;
/// Norm tolerance for truncated coherent states.
pub const TRUNCATED_NORM_TOLERANCE: f64 = 1e-8;
/// Maximum probability a coherent-state truncation may discard.
pub const TRUNCATION_LIMIT: f64 = 1e-8;
/// Default truncation half-width in units of `|alpha|`.
pub const DEFAULT_SIGMAS: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldStateRecord", into = "FieldStateRecord")]
pub struct FieldState {
    n_min: usize,
    amps: Vec<Complex64>,
}

impl FieldState {
    /// Arbitrary amplitudes starting at `n_min`; must be normalized.
    pub fn from_amplitudes(n_min: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidParameter(
                "field state has no amplitudes".into(),
            ));
        }
        if amps.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidParameter("non-finite amplitude".into()));
        }
        let state = Self { n_min, amps };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "field state norm {norm} differs from 1"
            )));
        }
        Ok(state)
    }

    /// Coherent state `e^{-|a|^2/2} a^n / sqrt(n!)`, truncated at
    /// `|a|^2 ± sigmas·|a|` and renormalized.
    pub fn coherent(alpha_mag: f64, phi_alpha: f64, sigmas: f64) -> Result<Self> {
        if !(alpha_mag.is_finite() && alpha_mag > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "coherent amplitude must be positive, got {alpha_mag}"
            )));
        }
        if !(sigmas >= 4.0) {
            return Err(Error::InvalidParameter(format!(
                "truncation width must be at least 4 sigma, got {sigmas}"
            )));
        }
        let mean = alpha_mag * alpha_mag;
        let n_min = (mean - sigmas * alpha_mag).floor().max(0.0) as usize;
        let n_max = (mean + sigmas * alpha_mag).ceil() as usize;

        let ln_alpha = alpha_mag.ln();
        let mut ln_factorial: f64 = (1..=n_min).map(|k| (k as f64).ln()).sum();
        let mut amps = Vec::with_capacity(n_max - n_min + 1);
        for n in n_min..=n_max {
            if n > n_min {
                ln_factorial += (n as f64).ln();
            }
            let ln_mag = -0.5 * mean + n as f64 * ln_alpha - 0.5 * ln_factorial;
            amps.push(Complex64::from_polar(ln_mag.exp(), n as f64 * phi_alpha));
        }
        let kept: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
        let discarded = 1.0 - kept;
        if discarded > TRUNCATION_LIMIT {
            return Err(Error::Truncation {
                discarded,
                limit: TRUNCATION_LIMIT,
            });
        }
        let scale = kept.sqrt().recip();
        amps.iter_mut().for_each(|c| *c *= scale);
        Ok(Self { n_min, amps })
    }

    /// Number state `|n0>`.
    pub fn single_fock(n0: usize) -> Self {
        Self {
            n_min: n0,
            amps: vec![Complex64::new(1.0, 0.0)],
        }
    }

    /// `2W + 1` adjacent number states around `n0` with equal weights and a
    /// linear phase ramp `k·phi_alpha`.
    pub fn adjacent_window(n0: usize, width: usize, phi_alpha: f64) -> Result<Self> {
        if width > n0 {
            return Err(Error::Domain(format!(
                "window n0 - W = {} - {} is negative",
                n0, width
            )));
        }
        let weight = ((2 * width + 1) as f64).sqrt().recip();
        let amps = (-(width as i64)..=width as i64)
            .map(|k| Complex64::from_polar(weight, k as f64 * phi_alpha))
            .collect();
        Ok(Self {
            n_min: n0 - width,
            amps,
        })
    }

    /// Equal-weight superposition of number states `n0 + kappa`, pairwise
    /// separated by more than one photon.
    pub fn separated_fock(n0: usize, kappas: &[i64], phi_alpha: f64) -> Result<Self> {
        if kappas.is_empty() {
            return Err(Error::InvalidParameter("no photon numbers given".into()));
        }
        let mut sorted = kappas.to_vec();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[1] - w[0] <= 1) {
            return Err(Error::Constraint(format!(
                "photon offsets {} and {} are not separated by more than one",
                w[0], w[1]
            )));
        }
        let lo = n0 as i64 + sorted[0];
        if lo < 0 {
            return Err(Error::Domain(format!(
                "photon number n0 + kappa = {lo} is negative"
            )));
        }
        let hi = n0 as i64 + sorted[sorted.len() - 1];
        let weight = (sorted.len() as f64).sqrt().recip();
        let mut amps = vec![Complex64::new(0.0, 0.0); (hi - lo + 1) as usize];
        for &k in &sorted {
            amps[(n0 as i64 + k - lo) as usize] =
                Complex64::from_polar(weight, k as f64 * phi_alpha);
        }
        Ok(Self {
            n_min: lo as usize,
            amps,
        })
    }

    pub fn n_min(&self) -> usize {
        self.n_min
    }

    pub fn n_max(&self) -> usize {
        self.n_min + self.amps.len() - 1
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Amplitude of photon number `n`; zero outside the stored window.
    pub fn amplitude(&self, n: i64) -> Complex64 {
        if n < self.n_min as i64 {
            return Complex64::new(0.0, 0.0);
        }
        self.amps
            .get((n - self.n_min as i64) as usize)
            .copied()
            .unwrap_or_default()
    }

    pub fn is_populated(&self, n: i64) -> bool {
        self.amplitude(n) != Complex64::new(0.0, 0.0)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Mean photon number.
    pub fn mean_photons(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(i, c)| (self.n_min + i) as f64 * c.norm_sqr())
            .sum::<f64>()
            / self.norm_sqr()
    }

    /// The same state multiplied by a global phase.
    pub fn with_global_phase(&self, theta: f64) -> Self {
        let rot = Complex64::from_polar(1.0, theta);
        Self {
            n_min: self.n_min,
            amps: self.amps.iter().map(|c| c * rot).collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldStateRecord {
    n_min: usize,
    amplitudes: Vec<[f64; 2]>,
}

impl From<FieldState> for FieldStateRecord {
    fn from(s: FieldState) -> Self {
        Self {
            n_min: s.n_min,
            amplitudes: s.amps.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl TryFrom<FieldStateRecord> for FieldState {
    type Error = Error;

    fn try_from(r: FieldStateRecord) -> Result<Self> {
        let amps = r
            .amplitudes
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect::<Vec<_>>();
        if amps.is_empty() {
            return Err(Error::InvalidParameter(
                "field state has no amplitudes".into(),
            ));
        }
        let state = Self {
            n_min: r.n_min,
            amps,
        };
        if (state.norm_sqr() - 1.0).abs() > TRUNCATED_NORM_TOLERANCE {
            return Err(Error::InvalidParameter(
                "field state record is not normalized".into(),
            ));
        }
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn coherent_amplitude_matches_formula() {
        let s = FieldState::coherent(2.0, 0.0, 10.0).unwrap();
        // e^{-2} 2^4 / sqrt(24), independent of the renormalization at 1e-8
        let expected = (-2.0f64).exp() * 16.0 / 24.0f64.sqrt();
        assert_abs_diff_eq!(expected, 0.44203, epsilon = 5e-5);
        assert_abs_diff_eq!(s.amplitude(4).re, expected, epsilon = 1e-9);
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn coherent_phase_ramp() {
        let s = FieldState::coherent(2.0, FRAC_PI_2, 10.0).unwrap();
        let c4 = s.amplitude(4);
        assert_abs_diff_eq!(c4.im, 0.0, epsilon = 1e-12);
        assert!(c4.re > 0.0);
        let c5 = s.amplitude(5);
        assert_abs_diff_eq!(c5.arg(), FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn coherent_truncation_errors() {
        assert!(matches!(
            FieldState::coherent(1.0, 0.0, 4.0),
            Err(Error::Truncation { .. })
        ));
        assert!(FieldState::coherent(0.0, 0.0, 6.0).is_err());
        assert!(FieldState::coherent(3.0, 0.0, 3.0).is_err());
        let s = FieldState::coherent(20.0, 0.3, DEFAULT_SIGMAS).unwrap();
        assert_eq!(s.n_min(), 280);
        assert_eq!(s.n_max(), 520);
    }

    #[test]
    fn coherent_is_log_concave_with_peak_near_mean() {
        for alpha in [2.5, 7.0, 20.0] {
            let s = FieldState::coherent(alpha, 0.0, 10.0).unwrap();
            let logs: Vec<f64> = s.amplitudes().iter().map(|c| c.norm().ln()).collect();
            for w in logs.windows(3) {
                assert!(w[1] - w[0] >= w[2] - w[1] - 1e-12);
            }
            let (imax, _) = s
                .amplitudes()
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                .unwrap();
            let peak = (s.n_min() + imax) as f64;
            assert!((peak - (alpha * alpha).floor()).abs() <= 1.0);
        }
    }

    #[test]
    fn fock_and_windows() {
        let s = FieldState::single_fock(5);
        assert_eq!(s.amplitude(5), Complex64::new(1.0, 0.0));
        assert_eq!(s.norm_sqr(), 1.0);
        assert_eq!((s.n_min(), s.n_max()), (5, 5));

        assert_eq!(
            FieldState::adjacent_window(7, 0, 1.1).unwrap(),
            FieldState::single_fock(7)
        );
        let w = FieldState::adjacent_window(10, 1, 0.0).unwrap();
        for n in 9..=11 {
            assert_abs_diff_eq!(w.amplitude(n).re, 1.0 / 3.0f64.sqrt(), epsilon = 1e-15);
        }
        let w = FieldState::adjacent_window(10, 1, FRAC_PI_2).unwrap();
        let ratio = w.amplitude(11) / w.amplitude(10);
        assert_abs_diff_eq!(
            (ratio - Complex64::new(0.0, 1.0)).norm(),
            0.0,
            epsilon = 1e-15
        );
        assert!(matches!(
            FieldState::adjacent_window(1, 2, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn separated_states() {
        let s = FieldState::separated_fock(10, &[0, 2, 4], 0.0).unwrap();
        for n in [10, 12, 14] {
            assert_abs_diff_eq!(s.amplitude(n).re, 1.0 / 3.0f64.sqrt(), epsilon = 1e-15);
        }
        assert!(!s.is_populated(11) && !s.is_populated(13));
        assert!(matches!(
            FieldState::separated_fock(10, &[0, 1], 0.0),
            Err(Error::Constraint(_))
        ));
        assert!(matches!(
            FieldState::separated_fock(1, &[-3, 0], 0.0),
            Err(Error::Domain(_))
        ));
        assert_eq!(
            FieldState::separated_fock(6, &[0], PI).unwrap(),
            FieldState::single_fock(6)
        );
    }

    #[test]
    fn json_record() {
        let s = FieldState::adjacent_window(3, 1, 0.5).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.starts_with("{\"n_min\":2,\"amplitudes\":[["));
        let back: FieldState = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert!(
            serde_json::from_str::<FieldState>(r#"{"n_min":0,"amplitudes":[[0.5,0.0]]}"#).is_err()
        );
    }

    proptest! {
        #[test]
        fn constructors_are_normalized(
            alpha in 2.0f64..15.0,
            phase in -7.0f64..7.0,
            n0 in 10usize..60,
            width in 0usize..10,
            offsets in proptest::collection::btree_set(0i64..6, 1..5),
        ) {
            let c = FieldState::coherent(alpha, phase, 10.0).unwrap();
            prop_assert!((c.norm_sqr() - 1.0).abs() <= TRUNCATED_NORM_TOLERANCE);
            let w = FieldState::adjacent_window(n0, width, phase).unwrap();
            prop_assert!((w.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE);
            let kappas: Vec<i64> = offsets.iter().map(|k| 3 * k).collect();
            let s = FieldState::separated_fock(n0, &kappas, phase).unwrap();
            prop_assert!((s.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE);
        }
    }
}
