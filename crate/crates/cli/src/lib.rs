//! Command-line front end: argument parsing, configuration merging and the
//! individual commands.

pub mod checks;
pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Invalid input or configuration (exit 2).
    Validation(String),
    /// A closed form and its numerical oracle disagree (exit 3).
    Disagreement(String),
    /// Anything else (exit 1).
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Disagreement(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Disagreement(m) => write!(f, "oracle disagreement: {m}"),
            CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl From<htldp::Error> for CliError {
    fn from(e: htldp::Error) -> Self {
        use htldp::Error as E;
        match e {
            E::Domain(_)
            | E::InvalidParams(_)
            | E::UnsupportedSupports(_)
            | E::SupportTooLarge { .. }
            | E::Infeasible(_)
            | E::NotHermitian { .. }
            | E::InsideSpectrum { .. } => CliError::Validation(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "htldp", version, about = "Largest-eigenvalue deviations of heavy-tailed Wigner matrices")]
pub struct Cli {
    /// JSON file with default values for the command's options.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads for Monte Carlo runs (0 = one per core).
    #[arg(long, global = true, env = "HTLDP_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate and plot the rate function J(x).
    Rate(RateArgs),
    /// Compute the variational constant c, optionally checked by brute force.
    SolveC(SolveArgs),
    /// Planted-spike sweep across the BBP transition.
    Bbp(BbpArgs),
    /// Tail-probability campaign over a grid of sizes and thresholds.
    Tail(TailArgs),
    /// Resolvent isotropy diagnostic over growing N.
    Isotropy(IsotropyArgs),
    /// Run the invariant suite and report pass/fail per check.
    Check(CheckArgs),
}

/// Model options shared by every command.
#[derive(Debug, Args, Serialize)]
pub struct ModelArgs {
    /// Tail exponent alpha in (0,2).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Off-diagonal tail constant.
    #[arg(long)]
    pub a: Option<f64>,
    /// Diagonal tail constant.
    #[arg(long)]
    pub b: Option<f64>,
    /// Uniform tail-bound constant (default min(a,b)/2).
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Diagonal angle support, e.g. `1,-1`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub nu1: Option<Vec<String>>,
    /// Off-diagonal angle support, e.g. `1,-1,i,-i` or `polar:0.5`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub nu2: Option<Vec<String>>,
    /// Complex Hermitian entries.
    #[arg(long, action = clap::ArgAction::SetTrue)]
    #[serde(skip_serializing_if = "is_false")]
    pub complex: bool,
    /// Entry law: `weibull` (unit variance, tail constant set by alpha) or `mixture`.
    #[arg(long)]
    pub law: Option<String>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Args, Serialize)]
pub struct RateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Use this constant instead of the closed form.
    #[arg(long)]
    pub c: Option<f64>,
    /// Evaluation points.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<f64>>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Cross-check with the brute-force oracle up to this size (1..=6).
    #[arg(long)]
    pub oracle: Option<usize>,
    /// Random restarts per support pattern for the oracle.
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the report (value, case, witness) as JSON to this file.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct BbpArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Spike strengths.
    #[arg(long, value_delimiter = ',')]
    pub theta: Option<Vec<f64>>,
    /// Matrix size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Samples per theta.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `diagonal` (X_11 planted) or `off-diagonal` (X_12 planted).
    #[arg(long)]
    pub planting: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct TailArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Matrix sizes.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Thresholds x of the events {lambda_max > x}.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<f64>>,
    /// Samples per size.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Validate the configuration and exit without running or writing.
    #[arg(long)]
    #[serde(skip)]
    pub dry_run: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct IsotropyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Matrix sizes.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Evaluation point above the spectrum.
    #[arg(long)]
    pub x: Option<f64>,
    /// Samples per size.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CheckArgs {
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let file = config::load_file(cli.config.as_deref())?;
    let threads = cli.threads.unwrap_or(0);
    let command = cli.command;
    htldp::experiments::with_threads(threads, move || match command {
        Command::Rate(a) => commands::rate(config::merge(file.as_ref(), &a)?),
        Command::SolveC(a) => commands::solve_c(config::merge(file.as_ref(), &a)?),
        Command::Bbp(a) => commands::bbp(config::merge(file.as_ref(), &a)?),
        Command::Tail(a) => commands::tail(config::merge(file.as_ref(), &a)?, a.dry_run),
        Command::Isotropy(a) => commands::isotropy(config::merge(file.as_ref(), &a)?),
        Command::Check(a) => checks::run(a.seed.unwrap_or(0)),
    })?
}
