//! Reproduction runs: the phase-equivalence table and the parameter sweeps.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldState, DEFAULT_SIGMAS};
use crate::model::{FrequencyGrid, SystemParams};
use crate::spectrum::{
    classical_reference_spectrum, dip_metric, l2_rel, quantum_spectrum, Spectrum,
};

/// Classical reference phases labelled `a` to `d`.
pub const REFERENCE_PHASES: [(char, f64); 4] =
    [('a', 0.0), ('b', FRAC_PI_2), ('c', PI), ('d', 1.5 * PI)];

/// Phases scanned along each axis of the table.
pub const TABLE_PHASES: [f64; 3] = [0.0, FRAC_PI_2, PI];

/// Rows `phi_alpha`, columns `phi`.
pub const EXPECTED_TABLE: [[char; 3]; 3] = [['a', 'b', 'c'], ['b', 'c', 'd'], ['c', 'd', 'a']];

/// A cell is matched when its distance to the nearest reference is below this.
pub const TABLE_L2_LIMIT: f64 = 0.05;
/// Required ratio between the runner-up and the nearest reference distance.
pub const TABLE_MARGIN: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Config {
    pub params: SystemParams,
    pub alpha: f64,
    pub omega_rabi: f64,
    pub sigmas: f64,
    pub grid: FrequencyGrid,
}

impl Default for Table1Config {
    fn default() -> Self {
        Self {
            params: SystemParams::default(),
            alpha: 20.0,
            omega_rabi: 5.0,
            sigmas: DEFAULT_SIGMAS,
            grid: FrequencyGrid::new(-40.0, 40.0, 4001).expect("static grid"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Cell {
    pub phi: f64,
    pub phi_alpha: f64,
    /// Nearest reference, if it wins by the required margin.
    pub letter: Option<char>,
    pub expected: char,
    /// Distance to references a..d.
    pub l2_to_references: [f64; 4],
    pub best_l2: f64,
    pub margin: f64,
}

impl Table1Cell {
    pub fn passes(&self) -> bool {
        self.letter == Some(self.expected) && self.best_l2 <= TABLE_L2_LIMIT
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Report {
    pub config: Table1Config,
    /// Row-major, rows `phi_alpha`, columns `phi`.
    pub cells: Vec<Table1Cell>,
    pub worst_l2: f64,
    pub passed: bool,
}

impl Table1Report {
    pub fn letters(&self) -> [[char; 3]; 3] {
        let mut out = [['?'; 3]; 3];
        for (i, cell) in self.cells.iter().enumerate() {
            out[i / 3][i % 3] = cell.letter.unwrap_or('?');
        }
        out
    }
}

/// Nearest reference by relative L2 distance.
pub fn classify(s: &Spectrum, references: &[Spectrum; 4]) -> Result<(Option<char>, [f64; 4], f64)> {
    let mut dist = [0.0; 4];
    for (d, r) in dist.iter_mut().zip(references) {
        *d = l2_rel(s, r)?;
    }
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]));
    let (best, second) = (dist[order[0]], dist[order[1]]);
    let margin = if best == 0.0 {
        f64::INFINITY
    } else {
        second / best
    };
    let letter = (margin >= TABLE_MARGIN).then_some(REFERENCE_PHASES[order[0]].0);
    Ok((letter, dist, margin))
}

pub fn reference_spectra(cfg: &Table1Config) -> Result<[Spectrum; 4]> {
    let make = |i: usize| {
        classical_reference_spectrum(
            &cfg.params,
            cfg.omega_rabi,
            REFERENCE_PHASES[i].1,
            &cfg.grid,
        )
    };
    Ok([make(0)?, make(1)?, make(2)?, make(3)?])
}

pub fn table1(cfg: &Table1Config) -> Result<Table1Report> {
    let gbar = cfg.omega_rabi / cfg.alpha;
    table1_with(cfg, |phi, phi_alpha| {
        let state = FieldState::coherent(cfg.alpha, phi_alpha, cfg.sigmas)?;
        quantum_spectrum(&state, &cfg.params.with_gbar(gbar).with_phi(phi), &cfg.grid)
    })
}

/// Table with a caller-supplied quantum spectrum for each `(phi, phi_alpha)`.
pub fn table1_with<F>(cfg: &Table1Config, quantum: F) -> Result<Table1Report>
where
    F: Fn(f64, f64) -> Result<Spectrum>,
{
    let refs = reference_spectra(cfg)?;
    let mut cells = Vec::with_capacity(9);
    for (row, &phi_alpha) in TABLE_PHASES.iter().enumerate() {
        for (col, &phi) in TABLE_PHASES.iter().enumerate() {
            let s = quantum(phi, phi_alpha)?;
            let (letter, dist, margin) = classify(&s, &refs)?;
            cells.push(Table1Cell {
                phi,
                phi_alpha,
                letter,
                expected: EXPECTED_TABLE[row][col],
                l2_to_references: dist,
                best_l2: dist.iter().copied().fold(f64::INFINITY, f64::min),
                margin,
            });
        }
    }
    let worst_l2 = cells.iter().map(|c| c.best_l2).fold(0.0, f64::max);
    let passed = cells.iter().all(Table1Cell::passes);
    Ok(Table1Report {
        config: *cfg,
        cells,
        worst_l2,
        passed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub metric: f64,
}

fn non_empty(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        Err(Error::Config("sweep range is empty".into()))
    } else {
        Ok(())
    }
}

/// Dip value of the classical spectrum inside `window` for each `omega21`.
pub fn omega21_dip_sweep(
    params: &SystemParams,
    omega_rabi: f64,
    phi_c: f64,
    window: (f64, f64),
    grid: &FrequencyGrid,
    omega21_values: &[f64],
) -> Result<Vec<SweepRow>> {
    non_empty(omega21_values)?;
    omega21_values
        .iter()
        .map(|&w21| {
            let p = SystemParams {
                omega21: w21,
                ..*params
            };
            p.validate()?;
            let s = classical_reference_spectrum(&p, omega_rabi, phi_c, grid)?;
            Ok(SweepRow {
                value: w21,
                metric: dip_metric(&s, window)?.1,
            })
        })
        .collect()
}

/// Distance between an adjacent-number window of half-width `W` and the
/// classical spectrum with `|Omega| = gbar sqrt(n0)`, `phi_c = phi + phi_alpha`.
pub fn width_sweep(
    params: &SystemParams,
    n0: usize,
    phi_alpha: f64,
    grid: &FrequencyGrid,
    widths: &[usize],
) -> Result<Vec<SweepRow>> {
    if widths.is_empty() {
        return Err(Error::Config("sweep range is empty".into()));
    }
    let omega_rabi = params.gbar_mag * (n0 as f64).sqrt();
    let reference = classical_reference_spectrum(params, omega_rabi, params.phi + phi_alpha, grid)?;
    widths
        .iter()
        .map(|&w| {
            let state = FieldState::adjacent_window(n0, w, phi_alpha)?;
            let s = quantum_spectrum(&state, params, grid)?;
            Ok(SweepRow {
                value: w as f64,
                metric: l2_rel(&s, &reference)?,
            })
        })
        .collect()
}

/// Dip value inside `window` as the drive phase is varied.
pub fn phase_sweep(
    state: &FieldState,
    params: &SystemParams,
    window: (f64, f64),
    grid: &FrequencyGrid,
    phases: &[f64],
) -> Result<Vec<SweepRow>> {
    non_empty(phases)?;
    phases
        .iter()
        .map(|&phi| {
            let s = quantum_spectrum(state, &params.with_phi(phi), grid)?;
            Ok(SweepRow {
                value: phi,
                metric: dip_metric(&s, window)?.1,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sweeps_are_config_errors() {
        let p = SystemParams::default().with_gbar(0.25);
        let grid = FrequencyGrid::new(-10.0, 10.0, 101).unwrap();
        assert!(matches!(
            omega21_dip_sweep(&p, 5.0, 0.0, (4.0, 5.5), &grid, &[]),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            width_sweep(&p, 400, 0.0, &grid, &[]),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            phase_sweep(&FieldState::single_fock(4), &p, (4.0, 5.5), &grid, &[]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn classify_requires_margin() {
        let grid = FrequencyGrid::new(-10.0, 10.0, 201).unwrap();
        let p = SystemParams::default();
        let refs = [0.0, FRAC_PI_2, PI, 1.5 * PI]
            .map(|phi| classical_reference_spectrum(&p, 5.0, phi, &grid).unwrap());
        let (letter, dist, _) = classify(&refs[2], &refs).unwrap();
        assert_eq!(letter, Some('c'));
        assert_eq!(dist[2], 0.0);
        // halfway between a and b: no clear winner
        let mid = classical_reference_spectrum(&p, 5.0, FRAC_PI_2 / 2.0, &grid).unwrap();
        let (letter, _, margin) = classify(&mid, &refs).unwrap();
        assert!(margin < TABLE_MARGIN);
        assert_eq!(letter, None);
    }
}
