//! `spdc`: exact and phase-space simulations of down-conversion from a Fock
//! pump.
//!
//! Exit codes: 0 success, 1 i/o error, 2 invalid input, 3 numerical failure,
//! 4 a built-in check failed.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use config::ConfigFile;
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "spdc", version, about = "Parametric down-conversion with a Fock-state pump")]
struct Cli {
    /// Directory receiving every output file and the run manifest.
    #[arg(long, global = true, env = "SPDC_OUT_DIR", default_value = "spdc-out")]
    out_dir: PathBuf,
    /// JSON file whose keys are long flag names; flags take precedence. A
    /// previous run's manifest.json works as-is.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: one per core). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact μ(τ) and final pair-number distribution.
    Exact(ExactArgs),
    /// Positive-P ensemble μ(τ).
    Pplus(EnsembleArgs),
    /// Truncated Wigner ensemble μ(τ).
    Wigner(EnsembleArgs),
    /// Maximal complete-conversion probability for a list of n.
    MumaxTable(TableArgs),
    /// Exact, positive-P and truncated Wigner on one grid, with a summary.
    Compare(CompareArgs),
    /// Moments of the initial-state samplers against their exact values.
    SampleCheck(SampleCheckArgs),
    /// Wall time and peak memory of exact runs.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeArg {
    EulerMaruyama,
    Midpoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepresentationArg {
    PositiveP,
    TruncatedWigner,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormatArg {
    Csv,
    Markdown,
}

#[derive(Args, Debug, Default)]
pub struct ExactArgs {
    /// Pump photon number.
    #[arg(long)]
    pub n: Option<u64>,
    /// End of the time grid (default 1.5·ln n/√n).
    #[arg(long)]
    pub tau_max: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Relative tolerance of the adaptive integrator.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct EnsembleArgs {
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub tau_max: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub trajectories: Option<usize>,
    /// Sub-ensembles used for standard errors; must divide --trajectories.
    #[arg(long)]
    pub subensembles: Option<usize>,
    /// Step size (default 1e-3/√n).
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trajectories with any amplitude above this are frozen and excluded
    /// (default 100·(1+√n)).
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct TableArgs {
    /// Comma-separated pump photon numbers.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u64>>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct CompareArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Run the ensembles (default: only for n ≤ 5000).
    #[arg(long)]
    pub ensembles: Option<bool>,
    /// In-window samples the positive-P check needs to be meaningful.
    #[arg(long)]
    pub min_checkpoints: Option<usize>,
    /// Absolute floor of the truncated Wigner tolerance.
    #[arg(long)]
    pub wigner_floor: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct SampleCheckArgs {
    #[arg(long, value_enum)]
    pub representation: Option<RepresentationArg>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Default)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u64>>,
    /// Same end time for every n (default 1.5·ln n/√n per n).
    #[arg(long)]
    pub tau_max: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Fail with exit code 4 if peak resident memory exceeds this.
    #[arg(long)]
    pub max_rss_mib: Option<f64>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Validation("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Validation(format!("cannot size thread pool: {e}")))?;
    }
    let name = match &cli.command {
        Command::Exact(_) => "exact",
        Command::Pplus(_) => "pplus",
        Command::Wigner(_) => "wigner",
        Command::MumaxTable(_) => "mumax-table",
        Command::Compare(_) => "compare",
        Command::SampleCheck(_) => "sample-check",
        Command::Bench(_) => "bench",
    };
    let config = cli.config.as_deref().map(|p| ConfigFile::load(p, name)).transpose()?;
    let config = config.as_ref();
    let out = cli.out_dir.as_path();
    match cli.command {
        Command::Exact(a) => commands::exact::run(a, config, out),
        Command::Pplus(a) => commands::ensemble::run(a, RepresentationArg::PositiveP, config, out),
        Command::Wigner(a) => commands::ensemble::run(a, RepresentationArg::TruncatedWigner, config, out),
        Command::MumaxTable(a) => commands::table::run(a, config, out),
        Command::Compare(a) => commands::compare::run(a, config, out),
        Command::SampleCheck(a) => commands::sample_check::run(a, config, out),
        Command::Bench(a) => commands::bench::run(a, config, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spdc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
