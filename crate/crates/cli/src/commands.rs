use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::io::BufReader;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use lamspec_core::experiments::{
    omega21_dip_sweep, phase_sweep, table1, width_sweep, SweepRow, Table1Config, Table1Report,
};
use lamspec_core::spectrum::peak_locations;
use lamspec_core::timedomain::oracle_spectrum;
use lamspec_core::verify::{checks, Level};
use lamspec_core::{
    classical_reference_spectrum, compare_spectra, dip_metric, quantum_spectrum, ComparisonReport,
    IntegratorConfig, Spectrum,
};
use serde::Serialize;

use crate::config::{ConfigError, Scenario, Solver, StateKind};

/// A check ran to completion and did not hold. Maps to exit code 1.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepKind {
    W21,
    Width,
    Phase,
}

impl SweepKind {
    fn label(self) -> &'static str {
        match self {
            SweepKind::W21 => "w21",
            SweepKind::Width => "width",
            SweepKind::Phase => "phase",
        }
    }

    fn metric(self) -> &'static str {
        match self {
            SweepKind::Width => "l2_to_classical",
            _ => "dip",
        }
    }

    fn default_values(self) -> Vec<f64> {
        match self {
            SweepKind::W21 => vec![0.1, 0.5, 1.0, 2.0],
            SweepKind::Width => vec![1.0, 2.0, 4.0, 8.0],
            SweepKind::Phase => (0..8).map(|j| PI * j as f64 / 4.0).collect(),
        }
    }
}

fn write(dir: &Path, file: &str, bytes: &[u8]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(file);
    fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    text.into_bytes()
}

fn csv(s: &Spectrum, header: &[(String, String)]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    s.write_csv(&mut buf, header)?;
    Ok(buf)
}

#[derive(Serialize)]
struct SpectrumMeta<'a> {
    command: &'static str,
    version: &'static str,
    config: Scenario,
    omega_rabi: f64,
    solver: Solver,
    scenario: &'a str,
    norm: f64,
    peak_locations: Vec<f64>,
    dip: Option<(f64, f64)>,
}

#[derive(Serialize)]
struct Crosscheck {
    config: Scenario,
    /// Oracle spectrum against the closed form.
    report: ComparisonReport,
    max_abs_deviation: f64,
}

pub fn spectrum(s: &Scenario, out: &Path) -> Result<()> {
    let params = s.params()?;
    let grid = s.grid()?;
    let state = s.field_state()?;
    let fast = || -> Result<Spectrum> {
        Ok(match &state {
            Some(st) => quantum_spectrum(st, &params, &grid)?,
            None => classical_reference_spectrum(&params, s.rabi(), params.phi, &grid)?,
        })
    };
    let oracle = || -> Result<Spectrum> {
        let st = state
            .as_ref()
            .ok_or_else(|| ConfigError("the oracle solver needs a quantized state".into()))?;
        let mut cfg = IntegratorConfig::resolving(st, &params, &grid, s.t_end);
        if let Some(dt) = s.dt {
            cfg = cfg.with_dt(dt);
        }
        Ok(oracle_spectrum(st, &params, &grid, &cfg)?)
    };
    let (main, cross) = match s.solver {
        Solver::Fast => (fast()?, None),
        Solver::Oracle => (oracle()?, None),
        Solver::Both => {
            let (f, o) = (fast()?, oracle()?);
            let report = compare_spectra(&o, &f)?;
            let max_abs_deviation = o
                .values()
                .iter()
                .zip(f.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            (
                f,
                Some(Crosscheck {
                    config: s.resolved(),
                    report,
                    max_abs_deviation,
                }),
            )
        }
    };

    let dip = dip_metric(&main, (s.dip_lo, s.dip_hi)).ok();
    let meta = SpectrumMeta {
        command: "spectrum",
        version: env!("CARGO_PKG_VERSION"),
        config: s.resolved(),
        omega_rabi: s.rabi(),
        solver: s.solver,
        scenario: main.scenario(),
        norm: main.norm(),
        peak_locations: peak_locations(&main),
        dip,
    };
    write(out, &format!("{}.csv", s.name), &csv(&main, &s.header())?)?;
    write(out, &format!("{}.json", s.name), &json(&meta))?;
    if let Some(c) = cross {
        println!(
            "oracle vs closed form: max abs deviation {:e}, l2 {:e}",
            c.max_abs_deviation, c.report.l2_rel
        );
        write(out, &format!("{}.crosscheck.json", s.name), &json(&c))?;
    }
    println!("norm {:.6}", main.norm());
    Ok(())
}

#[derive(Serialize)]
struct TableOutput<'a> {
    command: &'static str,
    version: &'static str,
    config: Scenario,
    letters: [[char; 3]; 3],
    report: &'a Table1Report,
}

pub fn table(s: &Scenario, out: &Path) -> Result<()> {
    let coherent = Scenario {
        state: StateKind::Coherent,
        ..s.clone()
    };
    let cfg = Table1Config {
        params: s.params()?,
        alpha: s.alpha,
        omega_rabi: coherent.rabi(),
        sigmas: s.sigmas,
        grid: s.grid()?,
    };
    let report = table1(&cfg)?;
    let letters = report.letters();
    println!("phi_alpha \\ phi    0     pi/2  pi");
    for (row, label) in letters.iter().zip(["0   ", "pi/2", "pi  "]) {
        println!(
            "{label}               {}     {}     {}",
            row[0], row[1], row[2]
        );
    }
    println!("worst l2 {:.4}", report.worst_l2);
    write(
        out,
        "table1.json",
        &json(&TableOutput {
            command: "table1",
            version: env!("CARGO_PKG_VERSION"),
            config: coherent.resolved(),
            letters,
            report: &report,
        }),
    )?;
    if !report.passed {
        let bad: Vec<String> = report
            .cells
            .iter()
            .filter(|c| !c.passes())
            .map(|c| {
                format!(
                    "(phi={:.4}, phi_alpha={:.4}) expected {}",
                    c.phi, c.phi_alpha, c.expected
                )
            })
            .collect();
        return Err(CheckFailed(format!("table mismatch at {}", bad.join(", "))).into());
    }
    Ok(())
}

pub fn parse_values(raw: Option<&str>, kind: SweepKind) -> Result<Vec<f64>, ConfigError> {
    let Some(raw) = raw else {
        return Ok(kind.default_values());
    };
    let values = raw
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| ConfigError(format!("sweep value `{v}` is not a number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(ConfigError("sweep range is empty".into()));
    }
    Ok(values)
}

pub fn sweep(s: &Scenario, kind: SweepKind, values: &[f64], out: &Path) -> Result<()> {
    let params = s.params()?;
    let grid = s.grid()?;
    let window = (s.dip_lo, s.dip_hi);
    let rows: Vec<SweepRow> = match kind {
        SweepKind::W21 => {
            let phi_c = match s.state {
                StateKind::Classical => s.phi,
                _ => s.phi + s.phi_alpha,
            };
            omega21_dip_sweep(&params, s.rabi(), phi_c, window, &grid, values)?
        }
        SweepKind::Width => {
            let widths = values
                .iter()
                .map(|&w| {
                    if w >= 0.0 && w.fract() == 0.0 {
                        Ok(w as usize)
                    } else {
                        Err(ConfigError(format!(
                            "width {w} is not a non-negative integer"
                        )))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            width_sweep(&params, s.n0, s.phi_alpha, &grid, &widths)?
        }
        SweepKind::Phase => {
            let state = s
                .field_state()?
                .ok_or_else(|| ConfigError("the phase sweep needs a quantized state".into()))?;
            phase_sweep(&state, &params, window, &grid, values)?
        }
    };

    let mut text = String::new();
    text.push_str(&format!(
        "# sweep={}\n# metric={}\n",
        kind.label(),
        kind.metric()
    ));
    for (k, v) in s.header() {
        text.push_str(&format!("# {k}={v}\n"));
    }
    text.push_str(&format!("value,{}\n", kind.metric()));
    for r in &rows {
        text.push_str(&format!("{},{}\n", r.value, r.metric));
        println!("{:>12} {:.6e}", r.value, r.metric);
    }
    write(
        out,
        &format!("{}.sweep-{}.csv", s.name, kind.label()),
        text.as_bytes(),
    )
}

pub fn compare(a: &Path, b: &Path, out: &Path) -> Result<()> {
    let load = |p: &Path| -> Result<Spectrum> {
        let file = fs::File::open(p).with_context(|| format!("cannot open {}", p.display()))?;
        Ok(Spectrum::read_csv(BufReader::new(file))?.0)
    };
    let report = compare_spectra(&load(a)?, &load(b)?)?;
    let bytes = json(&report);
    print!("{}", String::from_utf8_lossy(&bytes));
    write(out, "compare.json", &bytes)
}

pub fn verify(level: Level) -> Result<()> {
    for check in checks(level) {
        let start = Instant::now();
        match (check.run)() {
            Ok(detail) => println!(
                "ok   {:<32} {detail} ({:.2}s)",
                check.name,
                start.elapsed().as_secs_f64()
            ),
            Err(detail) => {
                println!("FAIL {:<32} {detail}", check.name);
                return Err(
                    CheckFailed(format!("invariant `{}` failed: {detail}", check.name)).into(),
                );
            }
        }
    }
    Ok(())
}
