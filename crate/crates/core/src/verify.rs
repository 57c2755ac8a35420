//! Self-check suite run by `lamspec verify`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::experiments::{table1, Table1Config};
use crate::field::{FieldState, DEFAULT_SIGMAS};
use crate::model::{dressed_transform, inverse_dressed_transform, FrequencyGrid, SystemParams};
use crate::spectral::steady_amplitudes;
use crate::spectrum::{l2_rel, phase_averaged_spectrum, quantum_spectrum, Spectrum};
use crate::timedomain::{full_bath_simulate, integrate_bare, BathConfig, IntegratorConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

pub type CheckFn = fn() -> std::result::Result<String, String>;

#[derive(Clone, Copy)]
pub struct Check {
    pub name: &'static str,
    pub run: CheckFn,
}

pub fn checks(level: Level) -> Vec<Check> {
    let mut list = vec![
        Check {
            name: "dressed-transform-unitarity",
            run: dressed_unitarity,
        },
        Check {
            name: "field-state-norms",
            run: field_norms,
        },
        Check {
            name: "oracle-equivalence",
            run: oracle_equivalence,
        },
        Check {
            name: "step-halving",
            run: step_halving,
        },
        Check {
            name: "normalization",
            run: normalization,
        },
        Check {
            name: "table1-phase-equivalence",
            run: table1_check,
        },
        Check {
            name: "single-fock-phase-independence",
            run: single_fock_phase,
        },
        Check {
            name: "phase-average-no-interference",
            run: phase_average,
        },
        Check {
            name: "separated-fock-additivity",
            run: separated_additivity,
        },
        Check {
            name: "no-full-cancellation",
            run: no_full_cancellation,
        },
    ];
    if level == Level::Full {
        list.push(Check {
            name: "wigner-weisskopf-bath",
            run: bath_decay,
        });
    }
    list
}

fn wide_grid() -> FrequencyGrid {
    FrequencyGrid::new(-40.0, 40.0, 4001).expect("static grid")
}

fn ensure(ok: bool, detail: String) -> std::result::Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lift<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Worst deviation between closed-form and time-integrated eigenmode
/// magnitudes, relative to the largest closed-form magnitude.
pub fn oracle_deviation(
    state: &FieldState,
    params: &SystemParams,
    grid: &FrequencyGrid,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let fast = steady_amplitudes(state, params, grid)?;
    let bare = integrate_bare(state, params, grid, cfg)?;
    let mut scale: f64 = 0.0;
    let mut worst: f64 = 0.0;
    for (b, block) in fast.blocks().iter().enumerate() {
        for j in 0..grid.count() {
            let (p, q) = (fast.plus(b)[j], fast.minus(b)[j]);
            let (bp, bq) = bare.block_magnitudes(j, block.m);
            scale = scale.max(p).max(q);
            worst = worst.max((p - bp).abs()).max((q - bq).abs());
        }
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

fn dressed_unitarity() -> std::result::Result<String, String> {
    let mut worst: f64 = 0.0;
    for k in 0..200 {
        let t = k as f64 * 0.37;
        let x = Complex64::new(t.sin(), (1.3 * t).cos());
        let y = Complex64::new((0.7 * t).cos(), -(2.1 * t).sin());
        let phi = 0.11 * k as f64;
        let (p, m) = dressed_transform(x, y, phi);
        worst = worst.max((x.norm_sqr() + y.norm_sqr() - p.norm_sqr() - m.norm_sqr()).abs());
        let (x2, y2) = inverse_dressed_transform(p, m, phi);
        worst = worst.max((x2 - x).norm()).max((y2 - y).norm());
    }
    ensure(worst <= 1e-12, format!("max deviation {worst:e}"))
}

fn field_norms() -> std::result::Result<String, String> {
    let states = [
        lift(FieldState::coherent(20.0, 0.4, DEFAULT_SIGMAS))?,
        FieldState::single_fock(400),
        lift(FieldState::adjacent_window(400, 4, 0.4))?,
        lift(FieldState::separated_fock(400, &[0, 2, 4], 0.4))?,
    ];
    let worst = states
        .iter()
        .map(|s| (s.norm_sqr() - 1.0).abs())
        .fold(0.0, f64::max);
    ensure(worst <= 1e-10, format!("max norm error {worst:e}"))
}

fn oracle_equivalence() -> std::result::Result<String, String> {
    let p = SystemParams::default().with_gbar(1.0).with_phi(0.3);
    let grid = lift(FrequencyGrid::new(-10.0, 10.0, 101))?;
    let mut worst: f64 = 0.0;
    for state in [
        FieldState::single_fock(3),
        lift(FieldState::adjacent_window(3, 1, 0.8))?,
    ] {
        let cfg = IntegratorConfig::resolving(&state, &p, &grid, IntegratorConfig::DEFAULT_T_END);
        worst = worst.max(lift(oracle_deviation(&state, &p, &grid, &cfg))?);
    }
    ensure(
        worst <= 1e-6,
        format!("max relative magnitude deviation {worst:e}"),
    )
}

fn step_halving() -> std::result::Result<String, String> {
    let p = SystemParams::default().with_gbar(1.0).with_phi(0.3);
    let grid = lift(FrequencyGrid::new(-8.0, 8.0, 17))?;
    let state = lift(FieldState::adjacent_window(3, 1, 0.8))?;
    let cfg = IntegratorConfig::resolving(&state, &p, &grid, IntegratorConfig::DEFAULT_T_END);
    let a = lift(integrate_bare(&state, &p, &grid, &cfg))?;
    let b = lift(integrate_bare(
        &state,
        &p,
        &grid,
        &cfg.with_dt(0.5 * cfg.dt),
    ))?;
    let mut worst: f64 = 0.0;
    for j in 0..grid.count() {
        for m in -1..=5 {
            let (p0, q0) = a.block_magnitudes(j, m);
            let (p1, q1) = b.block_magnitudes(j, m);
            worst = worst.max((p0 - p1).abs()).max((q0 - q1).abs());
        }
    }
    ensure(worst <= 1e-8, format!("max change {worst:e}"))
}

pub fn family_examples(phi_alpha: f64) -> Result<Vec<(&'static str, FieldState, SystemParams)>> {
    let base = SystemParams::default();
    Ok(vec![
        (
            "coherent",
            FieldState::coherent(20.0, phi_alpha, DEFAULT_SIGMAS)?,
            base.with_gbar(0.25),
        ),
        (
            "single-fock",
            FieldState::single_fock(400),
            base.with_gbar(0.25),
        ),
        (
            "adjacent-window",
            FieldState::adjacent_window(400, 2, phi_alpha)?,
            base.with_gbar(0.25),
        ),
        (
            "separated-fock",
            FieldState::separated_fock(400, &[0, 2, 4], phi_alpha)?,
            base.with_gbar(0.25),
        ),
        (
            "vacuum-fock",
            FieldState::single_fock(0),
            base.with_gbar(1.0),
        ),
    ])
}

fn normalization() -> std::result::Result<String, String> {
    let grid = wide_grid();
    let mut report = Vec::new();
    for (name, state, p) in lift(family_examples(0.0))? {
        let s = lift(quantum_spectrum(&state, &p, &grid))?;
        report.push(format!("{name}={:.5}", s.norm()));
        if !(0.97..=1.01).contains(&s.norm()) {
            return Err(report.join(", "));
        }
    }
    Ok(report.join(", "))
}

fn table1_check() -> std::result::Result<String, String> {
    let r = lift(table1(&Table1Config::default()))?;
    let letters: Vec<String> = r.letters().iter().map(|row| row.iter().collect()).collect();
    ensure(
        r.passed,
        format!("letters {letters:?}, worst l2 {:.4}", r.worst_l2),
    )
}

fn max_abs_diff(a: &Spectrum, b: &Spectrum) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn single_fock_phase() -> std::result::Result<String, String> {
    let grid = wide_grid();
    let state = FieldState::single_fock(400);
    let p = SystemParams::default().with_gbar(0.25);
    let base = lift(quantum_spectrum(&state, &p, &grid))?;
    let mut worst: f64 = 0.0;
    for phi in [FRAC_PI_2, 1.7] {
        worst = worst.max(max_abs_diff(
            &base,
            &lift(quantum_spectrum(&state, &p.with_phi(phi), &grid))?,
        ));
    }
    ensure(worst <= 1e-12, format!("max difference {worst:e}"))
}

fn phase_average() -> std::result::Result<String, String> {
    let grid = wide_grid();
    let p = SystemParams::default().with_gbar(0.25);
    let avg = lift(phase_averaged_spectrum(
        |phase| {
            quantum_spectrum(
                &FieldState::coherent(20.0, phase, DEFAULT_SIGMAS)?,
                &p,
                &grid,
            )
        },
        8,
    ))?;
    let state = lift(FieldState::coherent(20.0, 0.0, DEFAULT_SIGMAS))?;
    let off = lift(quantum_spectrum(&state, &p.with_interference(false), &grid))?;
    let diff = max_abs_diff(&avg, &off);
    let fock = lift(quantum_spectrum(&FieldState::single_fock(400), &p, &grid))?;
    let l2 = lift(l2_rel(&avg, &fock))?;
    ensure(
        diff <= 1e-10 && l2 <= 0.05,
        format!("max difference {diff:e}, l2 to single Fock {l2:.4}"),
    )
}

fn separated_additivity() -> std::result::Result<String, String> {
    let grid = wide_grid();
    let p = SystemParams::default().with_gbar(0.25).with_phi(0.7);
    let kappas = [0, 2, 4];
    let singles = kappas
        .iter()
        .map(|k| quantum_spectrum(&FieldState::single_fock(400 + *k as usize), &p, &grid))
        .collect::<Result<Vec<_>>>();
    let singles = lift(singles)?;
    let sum = lift(Spectrum::sum(&singles, "sum").and_then(|s| s.scaled(1.0 / 3.0)))?;
    let mut worst: f64 = 0.0;
    for phi_alpha in [0.0, 1.1, PI] {
        let s = lift(quantum_spectrum(
            &lift(FieldState::separated_fock(400, &kappas, phi_alpha))?,
            &p,
            &grid,
        ))?;
        worst = worst.max(max_abs_diff(&s, &sum));
    }
    ensure(worst <= 1e-12, format!("max difference {worst:e}"))
}

fn no_full_cancellation() -> std::result::Result<String, String> {
    let grid = wide_grid();
    let mut lowest = f64::INFINITY;
    for phase in [0.0, FRAC_PI_2, PI] {
        for (_, state, p) in lift(family_examples(phase))? {
            for phi in [0.0, 1.0, PI] {
                let s = lift(quantum_spectrum(&state, &p.with_phi(phi), &grid))?;
                lowest = lowest.min(s.values().iter().copied().fold(f64::INFINITY, f64::min));
            }
        }
    }
    ensure(lowest > 0.0, format!("smallest sample {lowest:e}"))
}

/// Worst absolute deviation of the upper population from `e^{-gamma t}` over
/// both dipole geometries, and the largest parallel vs orthogonal difference.
pub fn bath_decay_deviation(cfg_for: impl Fn(&SystemParams) -> BathConfig) -> Result<(f64, f64)> {
    let p = SystemParams::default().with_gbar(1.0).with_phi(0.4);
    let state = FieldState::adjacent_window(2, 1, 0.6)?;
    let mut worst: f64 = 0.0;
    let mut traces = Vec::new();
    for interference in [true, false] {
        let q = p.with_interference(interference);
        let run = full_bath_simulate(&state, &q, &cfg_for(&q))?;
        for (t, pop) in run.times.iter().zip(&run.upper_population) {
            worst = worst.max((pop - (-q.gamma() * t).exp()).abs());
        }
        traces.push(run.upper_population);
    }
    let split = traces[0]
        .iter()
        .zip(&traces[1])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok((worst, split))
}

fn bath_decay() -> std::result::Result<String, String> {
    let (worst, split) = lift(bath_decay_deviation(|q| BathConfig::new(800, 80.0, 8.0, q)))?;
    ensure(
        worst <= 0.02 && split <= 0.02,
        format!("max deviation from exp(-gamma t) {worst:.2e}, parallel vs orthogonal {split:.2e}"),
    )
}
