//! Command-line driver: parse flags and an optional `key = value` config
//! file, resolve a preset, dispatch one of the four subcommands, and write
//! CSV files (atomically, with the resolved configuration echoed as `#`
//! comment lines).

pub mod commands;
pub mod config;
pub mod output;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use thiserror::Error;

/// Exit codes: 0 success, 1 usage/config error, 2 numerical failure,
/// 3 I/O failure.
#[derive(Debug, Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl AppError {
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Numerical(_) => 2,
            AppError::Io { .. } => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "stabspde",
    version,
    about = "Explicit stabilized Chebyshev integrators for stiff parabolic S(P)DEs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate sample trajectories; writes one snapshot file per method
    /// plus the final-time profiles
    Simulate(CommonArgs),
    /// Run a strong/spatial convergence study; writes the error table with
    /// fitted slopes
    Converge(CommonArgs),
    /// Scan the abstract stability conditions; writes one row per
    /// (method, condition)
    Verify(CommonArgs),
    /// Tabulate the stability functions over the stability interval
    StabilityCurve(CommonArgs),
}

#[derive(Debug, Args, Default, Clone)]
pub struct CommonArgs {
    /// Named parameter preset (see README for the list per subcommand)
    #[arg(long)]
    pub preset: Option<String>,
    /// Flat `key = value` config file; flags override file entries
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed shared by every method in the run
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo sample count
    #[arg(long)]
    pub samples: Option<usize>,
    /// Grid intervals N (mesh width 1/N)
    #[arg(long)]
    pub grid: Option<usize>,
    /// Damping parameter of the stabilized methods
    #[arg(long)]
    pub eta: Option<f64>,
    /// Comma-separated method list (sk-rock, variant, implicit-euler,
    /// explicit-euler; crank-nicolson for verify only)
    #[arg(long)]
    pub methods: Option<String>,
    /// Output directory (created if missing)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (defaults to the machine's core count)
    #[arg(long)]
    pub threads: Option<usize>,
    /// Stage count for stability-curve
    #[arg(long)]
    pub stages: Option<u32>,
}

/// Runs one parsed command; returns the paths written.
pub fn run(cli: Cli) -> Result<Vec<PathBuf>, AppError> {
    let (args, kind) = match &cli.command {
        Command::Simulate(a) => (a, config::Kind::Simulate),
        Command::Converge(a) => (a, config::Kind::Converge),
        Command::Verify(a) => (a, config::Kind::Verify),
        Command::StabilityCurve(a) => (a, config::Kind::StabilityCurve),
    };
    let overrides = config::Overrides::resolve(args)?;
    if let Some(n) = overrides.threads {
        // ignore the error when a pool is already installed (tests)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match kind {
        config::Kind::Simulate => commands::cmd_simulate(&config::SimulateSetup::resolve(&overrides)?),
        config::Kind::Converge => {
            commands::cmd_converge(&config::ConvergeSetup::resolve(&overrides)?).map(|p| vec![p])
        }
        config::Kind::Verify => {
            commands::cmd_verify(&config::VerifySetup::resolve(&overrides)?).map(|p| vec![p])
        }
        config::Kind::StabilityCurve => {
            commands::cmd_stability_curve(&config::CurveSetup::resolve(&overrides)?).map(|p| vec![p])
        }
    }
}
