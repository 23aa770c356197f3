//! `qir` — detection statistics, error bounds and Monte Carlo campaigns for
//! photon-counting illumination protocols, from the command line.

mod commands;
mod config;
mod output;
mod sweep;

use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Command-line errors, mapped onto the stable exit-code contract:
/// 0 success, 2 usage, 3 domain error, 4 I/O.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(qir_core::Error),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Domain(e) => write!(f, "{e}"),
            CliError::Io(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<qir_core::Error> for CliError {
    fn from(e: qir_core::Error) -> Self {
        CliError::Domain(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "qir",
    version,
    about = "Detection statistics, error probabilities, range-delay error bounds and \
             Monte Carlo validation for photon-counting illumination protocols",
    after_help = "Datasets written with --out get an accompanying <out>.manifest that \
                  records the resolved parameters; feed it back with --config to \
                  reproduce the run bit-for-bit."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single-shot false-alarm/detection probabilities and SNR per protocol.
    Snr(commands::SnrArgs),
    /// Bayesian error probability of the coincidence decision rule.
    Perr(commands::PerrArgs),
    /// Ziv-Zakai bound on the mean-square range-delay error.
    Zzb(commands::ZzbArgs),
    /// Equal-SNR integration-time matching and reduction factor.
    Timebudget(commands::TimebudgetArgs),
    /// Monte Carlo campaigns: coincidence counting, error rates, delay estimation.
    Mc(commands::McArgs),
    /// Parameter sweeps producing curve-ready CSV/JSON datasets.
    Sweep(sweep::SweepArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Snr(args) => commands::cmd_snr(args),
        Command::Perr(args) => commands::cmd_perr(args),
        Command::Zzb(args) => commands::cmd_zzb(args),
        Command::Timebudget(args) => commands::cmd_timebudget(args),
        Command::Mc(args) => commands::cmd_mc(args),
        Command::Sweep(args) => sweep::cmd_sweep(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
