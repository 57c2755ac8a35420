//! Emission spectra, the classical-drive reference and comparison metrics.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::model::{detunings, FrequencyGrid, SystemParams};
use crate::spectral::{steady_amplitudes, Block, Kernel, SteadyAmplitudes};
use num_complex::Complex64;

/// Intensity samples on a uniform detuning grid.
///
/// Values are normalized so that the integral over an unbounded grid is the
/// total emission probability (one for a normalized initial state).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: FrequencyGrid,
    values: Vec<f64>,
    scenario: String,
    norm: f64,
}

impl Spectrum {
    pub fn new(grid: FrequencyGrid, values: Vec<f64>, scenario: impl Into<String>) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} samples",
                values.len(),
                grid.count()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain(
                "spectrum values must be finite and non-negative".into(),
            ));
        }
        let norm = grid.spacing() * values.iter().sum::<f64>();
        Ok(Self {
            grid,
            values,
            scenario: scenario.into(),
            norm,
        })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scenario(&self) -> &str {
        &self.scenario
    }

    /// `spacing · Σ values`, recorded at construction.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn with_scenario(mut self, scenario: impl Into<String>) -> Self {
        self.scenario = scenario.into();
        self
    }

    pub fn scaled(&self, factor: f64) -> Result<Spectrum> {
        Spectrum::new(
            self.grid,
            self.values.iter().map(|v| v * factor).collect(),
            self.scenario.clone(),
        )
    }

    /// Sample-wise sum of spectra sharing one grid.
    pub fn sum<'a>(
        parts: impl IntoIterator<Item = &'a Spectrum>,
        scenario: &str,
    ) -> Result<Spectrum> {
        let mut iter = parts.into_iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::Domain("sum of no spectra".into()))?;
        let mut values = first.values.clone();
        for s in iter {
            check_grids(&first.grid, &s.grid)?;
            values.iter_mut().zip(&s.values).for_each(|(a, b)| *a += b);
        }
        Spectrum::new(first.grid, values, scenario)
    }

    /// Writes `# key=value` header lines followed by `detuning,intensity` rows.
    pub fn write_csv<W: Write>(&self, mut out: W, header: &[(String, String)]) -> Result<()> {
        writeln!(out, "# scenario={}", self.scenario)?;
        for (k, v) in header {
            writeln!(out, "# {k}={v}")?;
        }
        writeln!(out, "# norm={}", self.norm)?;
        writeln!(out, "detuning,intensity")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", self.grid.at(i), v)?;
        }
        Ok(())
    }

    /// Parses the format written by [`Spectrum::write_csv`]; returns the
    /// header pairs other than `scenario` and `norm`.
    pub fn read_csv<R: BufRead>(input: R) -> Result<(Spectrum, Vec<(String, String)>)> {
        let mut scenario = String::new();
        let mut header = Vec::new();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line == "detuning,intensity" {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                let (k, v) = meta.trim().split_once('=').ok_or_else(|| {
                    Error::Parse(format!("line {}: header without '='", lineno + 1))
                })?;
                match k.trim() {
                    "scenario" => scenario = v.to_string(),
                    "norm" => {}
                    key => header.push((key.to_string(), v.to_string())),
                }
                continue;
            }
            let (x, y) = line.split_once(',').ok_or_else(|| {
                Error::Parse(format!("line {}: expected two columns", lineno + 1))
            })?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            xs.push(parse(x)?);
            ys.push(parse(y)?);
        }
        if xs.len() < 2 {
            return Err(Error::Parse("spectrum needs at least two rows".into()));
        }
        let grid = FrequencyGrid::new(xs[0], xs[xs.len() - 1], xs.len())?;
        let tol = 1e-9 * grid.spacing();
        if let Some(i) = (0..xs.len()).find(|&i| (xs[i] - grid.at(i)).abs() > tol) {
            return Err(Error::Parse(format!(
                "row {i}: detunings are not uniformly spaced"
            )));
        }
        Ok((Spectrum::new(grid, ys, scenario)?, header))
    }
}

fn check_grids(a: &FrequencyGrid, b: &FrequencyGrid) -> Result<()> {
    if a.matches(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "[{}, {}] x {} vs [{}, {}] x {}",
            a.lo(),
            a.hi(),
            a.count(),
            b.lo(),
            b.hi(),
            b.count()
        )))
    }
}

/// `S = D · Σ_blocks (|w+|^2 + |w-|^2)`; cross terms are dropped when
/// `params.interference` is off.
pub fn assemble_spectrum(amps: &SteadyAmplitudes, params: &SystemParams) -> Result<Spectrum> {
    let grid = *amps.grid();
    let mut values = vec![0.0; grid.count()];
    for b in 0..amps.blocks().len() {
        if params.interference {
            for ((s, p), m) in values.iter_mut().zip(amps.plus(b)).zip(amps.minus(b)) {
                *s += p * p + m * m;
            }
        } else {
            for (s, w) in values.iter_mut().zip(amps.incoherent(b)) {
                *s += w;
            }
        }
    }
    values.iter_mut().for_each(|s| *s *= params.density);
    Spectrum::new(
        grid,
        values,
        format!("quantum drive, {} blocks", amps.blocks().len()),
    )
}

/// Steady amplitudes and assembly in one call.
pub fn quantum_spectrum(
    state: &FieldState,
    params: &SystemParams,
    grid: &FrequencyGrid,
) -> Result<Spectrum> {
    assemble_spectrum(&steady_amplitudes(state, params, grid)?, params)
}

/// Spectrum for a classical drive of Rabi frequency `omega_rabi` and phase
/// `phi_c`: a single block with unit sources on both slots.
pub fn classical_reference_spectrum(
    params: &SystemParams,
    omega_rabi: f64,
    phi_c: f64,
    grid: &FrequencyGrid,
) -> Result<Spectrum> {
    if !(omega_rabi >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Rabi frequency must be non-negative, got {omega_rabi}"
        )));
    }
    let p = params.with_phi(phi_c);
    let kernel = Kernel::new(&p)?;
    let one = Complex64::new(1.0, 0.0);
    let block = Block {
        m: 0,
        v: omega_rabi,
        src_x: one,
        src_y: one,
    };
    let values = grid
        .points()
        .map(|omega| {
            let (d, dh) = detunings(omega, &p);
            let e = kernel.eigen(&block, d, dh);
            let w = if p.interference {
                e.weight()
            } else {
                e.incoherent_weight()
            };
            p.density * w
        })
        .collect();
    Spectrum::new(
        *grid,
        values,
        format!("classical drive, |Omega|={omega_rabi}, phi_c={phi_c}"),
    )
}

/// Uniform average of `builder(phase)` over `phase = 2πj/m_phases`.
pub fn phase_averaged_spectrum<F>(builder: F, m_phases: usize) -> Result<Spectrum>
where
    F: Fn(f64) -> Result<Spectrum>,
{
    if m_phases < 4 {
        return Err(Error::InvalidParameter(format!(
            "phase average needs at least 4 phases, got {m_phases}"
        )));
    }
    let spectra = (0..m_phases)
        .map(|j| builder(2.0 * PI * j as f64 / m_phases as f64))
        .collect::<Result<Vec<_>>>()?;
    let sum = Spectrum::sum(&spectra, "")?;
    let scenario = format!("{} averaged over {m_phases} phases", spectra[0].scenario());
    Ok(sum.scaled(1.0 / m_phases as f64)?.with_scenario(scenario))
}

/// Contribution of block `m` alone.
pub fn restricted_spectrum(
    amps: &SteadyAmplitudes,
    params: &SystemParams,
    m: i64,
) -> Result<Spectrum> {
    let b = amps
        .block_index(m)
        .ok_or_else(|| Error::Domain(format!("block {m} is not populated")))?;
    let values = if params.interference {
        amps.plus(b)
            .iter()
            .zip(amps.minus(b))
            .map(|(p, q)| params.density * (p * p + q * q))
            .collect()
    } else {
        amps.incoherent(b)
            .iter()
            .map(|w| params.density * w)
            .collect()
    };
    Spectrum::new(*amps.grid(), values, format!("block {m} only"))
}

/// Lowest sample inside `window` as `(detuning, value)`; ties go to the
/// lowest detuning.
pub fn dip_metric(s: &Spectrum, window: (f64, f64)) -> Result<(f64, f64)> {
    let (a, b) = window;
    let grid = s.grid();
    let slack = 1e-9 * grid.spacing();
    if !(a <= b) || a < grid.lo() - slack || b > grid.hi() + slack {
        return Err(Error::Domain(format!(
            "window [{a}, {b}] is not inside the grid [{}, {}]",
            grid.lo(),
            grid.hi()
        )));
    }
    let mut best: Option<(f64, f64)> = None;
    for (i, &v) in s.values().iter().enumerate() {
        let x = grid.at(i);
        if x < a - slack || x > b + slack {
            continue;
        }
        if best.is_none_or(|(_, bv)| v < bv) {
            best = Some((x, v));
        }
    }
    best.ok_or_else(|| Error::Domain(format!("window [{a}, {b}] holds no grid sample")))
}

/// Detunings of strict 3-point local maxima (plateaus report their first sample).
pub fn peak_locations(s: &Spectrum) -> Vec<f64> {
    let v = s.values();
    (1..v.len().saturating_sub(1))
        .filter(|&i| v[i] > v[i - 1] && v[i] >= v[i + 1])
        .map(|i| s.grid().at(i))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// `||a - b||_2 / ||b||_2`
    pub l2_rel: f64,
    /// `max|a - b| / max|b|`
    pub sup_rel: f64,
    pub peak_locations: Vec<f64>,
    pub reference_peak_locations: Vec<f64>,
    /// Global minimum of `a` as `(detuning, value)`.
    pub dip: (f64, f64),
}

pub fn l2_rel(a: &Spectrum, b: &Spectrum) -> Result<f64> {
    check_grids(a.grid(), b.grid())?;
    let (num, den) = a
        .values()
        .iter()
        .zip(b.values())
        .fold((0.0, 0.0), |(n, d), (x, y)| {
            (n + (x - y) * (x - y), d + y * y)
        });
    if den == 0.0 {
        return Ok(if num == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok((num / den).sqrt())
}

pub fn compare_spectra(a: &Spectrum, b: &Spectrum) -> Result<ComparisonReport> {
    let l2 = l2_rel(a, b)?;
    let max_diff = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let max_ref = b.values().iter().copied().fold(0.0, f64::max);
    let sup_rel = if max_ref == 0.0 {
        if max_diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        max_diff / max_ref
    };
    let dip = dip_metric(a, (a.grid().lo(), a.grid().hi()))?;
    Ok(ComparisonReport {
        l2_rel: l2,
        sup_rel,
        peak_locations: peak_locations(a),
        reference_peak_locations: peak_locations(b),
        dip,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::io::Cursor;

    fn wide() -> FrequencyGrid {
        FrequencyGrid::new(-40.0, 40.0, 4001).unwrap()
    }

    #[test]
    fn two_level_normalization_and_width() {
        let p = SystemParams::new(1.0, 0.0, 1.0, 0.0).unwrap();
        let s = quantum_spectrum(&FieldState::single_fock(3), &p, &wide()).unwrap();
        // missing tail mass 2·(1/2π)/40 ≈ 0.008
        assert!((s.norm() - 1.0).abs() < 0.01, "norm {}", s.norm());
        // FWHM from the samples: half maximum of 2/π at |delta| = 1/2
        let peak = s.values().iter().copied().fold(0.0, f64::max);
        assert_abs_diff_eq!(peak, 2.0 / PI, epsilon = 1e-12);
        let above: Vec<f64> = s
            .values()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v >= 0.5 * peak - 1e-12)
            .map(|(i, _)| s.grid().at(i))
            .collect();
        let fwhm = above.last().unwrap() - above.first().unwrap();
        assert_abs_diff_eq!(fwhm, 1.0, epsilon = 2.0 * s.grid().spacing());
    }

    #[test]
    fn interference_off_is_sum_of_single_channel_spectra() {
        let grid = FrequencyGrid::new(-20.0, 20.0, 801).unwrap();
        let p = SystemParams::default().with_gbar(0.8).with_phi(0.3);
        let state = FieldState::adjacent_window(6, 2, 0.7).unwrap();
        let off = quantum_spectrum(&state, &p.with_interference(false), &grid).unwrap();
        let kernel_x = single_channel(&state, &p, &grid, true);
        let kernel_y = single_channel(&state, &p, &grid, false);
        for i in 0..grid.count() {
            let sum = kernel_x[i] + kernel_y[i];
            assert!((off.values()[i] - sum).abs() <= 1e-14 * sum.max(1e-3));
        }
    }

    /// Brute-force single-source spectrum: |a K|^2 per eigenmode, written out
    /// term by term from the block amplitudes.
    fn single_channel(
        state: &FieldState,
        p: &SystemParams,
        grid: &FrequencyGrid,
        x_slot: bool,
    ) -> Vec<f64> {
        let blocks = crate::spectral::build_blocks(state, p);
        grid.points()
            .map(|omega| {
                blocks
                    .iter()
                    .map(|b| {
                        let e = crate::spectral::block_eigen_amplitudes(b, omega, p).unwrap();
                        if x_slot {
                            e.plus_x.norm_sqr() + e.minus_x.norm_sqr()
                        } else {
                            e.plus_y.norm_sqr() + e.minus_y.norm_sqr()
                        }
                    })
                    .sum::<f64>()
                    * p.density
            })
            .collect()
    }

    #[test]
    fn classical_reference_examples() {
        let grid = wide();
        let p = SystemParams::default();
        let a = classical_reference_spectrum(&p, 5.0, 0.3, &grid).unwrap();
        let b = classical_reference_spectrum(&p, 5.0, 0.3 + 2.0 * PI, &grid).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= 1e-14 * x.max(1e-3));
        }

        // phi_c = 0: perfect cancellation of w- at delta = 4.5
        let s = classical_reference_spectrum(&p, 5.0, 0.0, &grid).unwrap();
        let (loc, val) = dip_metric(&s, (4.0, 5.5)).unwrap();
        assert_abs_diff_eq!(loc, 4.5, epsilon = 1e-9);
        // only w+ survives there
        assert!(val < 1e-2 * s.values().iter().copied().fold(0.0, f64::max));
        let pi = classical_reference_spectrum(&p, 5.0, PI, &grid).unwrap();
        let (loc, _) = dip_metric(&pi, (-6.5, -4.0)).unwrap();
        assert_abs_diff_eq!(loc, -5.5, epsilon = 1e-9);

        // |Omega| = 0: Lorentzians of weight gamma_i/gamma at 0 and -omega21
        let zero =
            classical_reference_spectrum(&p.with_interference(false), 0.0, 0.0, &grid).unwrap();
        for (i, v) in zero.values().iter().enumerate() {
            let d = grid.at(i);
            let expected =
                (0.5 / (2.0 * PI)) * (1.0 / (0.25 + d * d) + 1.0 / (0.25 + (d + 1.0) * (d + 1.0)));
            assert_abs_diff_eq!(*v, expected, epsilon = 1e-14);
        }
    }

    #[test]
    fn dip_metric_edges() {
        let grid = FrequencyGrid::new(0.0, 1.0, 11).unwrap();
        let rising = Spectrum::new(grid, (0..11).map(|i| i as f64).collect(), "ramp").unwrap();
        assert_eq!(dip_metric(&rising, (0.3, 0.7)).unwrap(), (grid.at(3), 3.0));
        let flat = Spectrum::new(grid, vec![2.0; 11], "flat").unwrap();
        assert_eq!(dip_metric(&flat, (0.0, 1.0)).unwrap(), (0.0, 2.0));
        assert!(matches!(
            dip_metric(&flat, (0.31, 0.39)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            dip_metric(&flat, (-1.0, 0.5)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn compare_identity_and_mismatch() {
        let p = SystemParams::default();
        let s = classical_reference_spectrum(&p, 5.0, 1.0, &wide()).unwrap();
        let r = compare_spectra(&s, &s).unwrap();
        assert_eq!((r.l2_rel, r.sup_rel), (0.0, 0.0));
        assert_eq!(r.peak_locations, r.reference_peak_locations);
        let other = classical_reference_spectrum(
            &p,
            5.0,
            1.0,
            &FrequencyGrid::new(-40.0, 40.0, 401).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            compare_spectra(&s, &other),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn restricted_blocks_sum_to_full() {
        let grid = FrequencyGrid::new(-15.0, 15.0, 601).unwrap();
        let p = SystemParams::default().with_gbar(0.9).with_phi(1.1);
        let state = FieldState::adjacent_window(8, 2, 0.4).unwrap();
        let amps = steady_amplitudes(&state, &p, &grid).unwrap();
        let full = assemble_spectrum(&amps, &p).unwrap();
        let parts = amps
            .blocks()
            .iter()
            .map(|b| restricted_spectrum(&amps, &p, b.m))
            .collect::<Result<Vec<_>>>()
            .unwrap();
        let total = Spectrum::sum(&parts, "sum").unwrap();
        for (x, y) in full.values().iter().zip(total.values()) {
            assert!((x - y).abs() <= 1e-14 * x.max(1e-6));
        }
        assert!(matches!(
            restricted_spectrum(&amps, &p, 42),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn csv_round_trip() {
        let p = SystemParams::default();
        let grid = FrequencyGrid::new(-3.0, 3.0, 61).unwrap();
        let s = classical_reference_spectrum(&p, 2.0, 0.5, &grid).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf, &[("gamma1".into(), "0.5".into())])
            .unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# scenario=classical drive"));
        assert!(text.contains("# gamma1=0.5\n"));
        let (back, header) = Spectrum::read_csv(Cursor::new(buf)).unwrap();
        assert_eq!(header, vec![("gamma1".to_string(), "0.5".to_string())]);
        assert_eq!(back.values(), s.values());
        assert!(back.grid().matches(s.grid()));
        assert_eq!(back.scenario(), s.scenario());
    }

    #[test]
    fn phase_average_requires_four_phases() {
        let grid = FrequencyGrid::new(-1.0, 1.0, 3).unwrap();
        let r = phase_averaged_spectrum(|_| Spectrum::new(grid, vec![1.0; 3], "x"), 3);
        assert!(r.is_err());
    }
}
