#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use lamspec_core::verify::Level;

mod commands;
mod config;

use commands::{CheckFailed, SweepKind};
use config::{ConfigError, Scenario};

/// Spontaneous-emission spectra of a Lambda atom driven by a quantized field.
///
/// Settings come from `--config`, then `LAMSPEC_<KEY>` environment
/// variables, then `--set key=value`, later layers winning.
#[derive(Parser)]
#[command(name = "lamspec", version)]
struct Cli {
    /// Flat TOML scenario file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a scenario key, e.g. `--set phi=1.57`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,

    /// Directory for CSV and JSON artifacts.
    #[arg(long, default_value = ".", global = true)]
    out: PathBuf,

    /// Worker threads, 0 for one per core.
    #[arg(long, default_value_t = 0, global = true)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one spectrum.
    Spectrum,
    /// Quantum vs classical phase-equivalence table.
    Table1,
    /// Scan one parameter and report a spectral metric.
    Sweep {
        #[arg(long, value_enum)]
        kind: SweepKind,
        /// Comma-separated sweep points.
        #[arg(long)]
        values: Option<String>,
    },
    /// Compare two spectrum CSV files, the second being the reference.
    Compare { a: PathBuf, b: PathBuf },
    /// Run the self-check suite.
    Verify {
        #[arg(long, value_enum, default_value_t = VerifyLevel::Quick)]
        level: VerifyLevel,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyLevel {
    Quick,
    Full,
}

fn run(cli: Cli) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| anyhow::anyhow!("cannot start thread pool: {e}"))?;
    let scenario = || Scenario::load(cli.config.as_deref(), std::env::vars(), &cli.sets);
    match &cli.command {
        Command::Spectrum => commands::spectrum(&scenario()?, &cli.out),
        Command::Table1 => commands::table(&scenario()?, &cli.out),
        Command::Sweep { kind, values } => {
            let values = commands::parse_values(values.as_deref(), *kind)?;
            commands::sweep(&scenario()?, *kind, &values, &cli.out)
        }
        Command::Compare { a, b } => commands::compare(a, b, &cli.out),
        Command::Verify { level } => commands::verify(match level {
            VerifyLevel::Quick => Level::Quick,
            VerifyLevel::Full => Level::Full,
        }),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    if err.downcast_ref::<CheckFailed>().is_some() {
        return 1;
    }
    match err.downcast_ref::<lamspec_core::Error>() {
        Some(lamspec_core::Error::NonConvergence { .. }) => 3,
        Some(lamspec_core::Error::Io(_)) | None => 1,
        Some(_) => 2,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
