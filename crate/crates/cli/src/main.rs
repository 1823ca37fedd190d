//! `schwinger`: batch pipeline for the lattice Schwinger model.
//!
//! Every subcommand reads a TOML config (defaults apply to missing keys),
//! writes CSV tables into `--out` and records them in `manifest.json`.
//! Progress goes to stderr, summaries to stdout.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;

use error::CliError;

#[derive(Parser)]
#[command(name = "schwinger", version, about = "Massive Schwinger model laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mass gap over an (e, m) grid in the θ = 0 and θ = π sectors.
    Spectrum(Common),
    /// Pseudo-critical points and their extrapolation to e = 0.
    Critical(Common),
    /// Truncated three-qubit VQE sweep, shot noise and error mitigation.
    Vqe(Common),
    /// Gauge cutoff and low-dimensional truncation studies.
    Truncation(Common),
    /// Gap curves in arbitrary θ sectors.
    Theta(Common),
}

/// Options shared by every subcommand.
#[derive(Args, Clone, Debug)]
pub struct Common {
    /// TOML config file; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    /// Base seed for every random stream.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, f): (&Common, fn(&Common) -> Result<(), CliError>) = match &cli.command {
        Command::Spectrum(c) => (c, commands::spectrum::run),
        Command::Critical(c) => (c, commands::critical::run),
        Command::Vqe(c) => (c, commands::vqe::run),
        Command::Truncation(c) => (c, commands::truncation::run),
        Command::Theta(c) => (c, commands::theta::run),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.jobs)
        .build()
        .map_err(|e| CliError::io(format!("thread pool: {e}")))?;
    pool.install(|| f(common))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            eprintln!("{}", CliError::validation(e.kind().to_string()).line());
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.kind.exit_code() as u8)
        }
    }
}
