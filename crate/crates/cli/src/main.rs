//! Batch experiment runner for the Steklov–Neumann toolkit.
//!
//! Every subcommand reads a TOML config, runs one experiment, writes a CSV
//! table (and an SVG plot when enabled) into the output directory, prints a
//! summary, and exits 0 only when every assertion passed. Exit codes:
//! 0 success, 1 assertion failure, 2 configuration error, 3 solver or
//! diagnostic failure.

mod config;
mod experiments;
mod report;
mod svg;

use clap::{Parser, Subcommand};
use config::ExperimentConfig;
use experiments::StageError;
use report::ExperimentOutcome;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "steklov",
    about = "Mixed Steklov-Neumann eigenvalue experiments on doubly connected planar domains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form spectrum of a concentric annulus.
    Exact(RunArgs),
    /// One eigenvalue solve on a configured domain.
    Solve(RunArgs),
    /// Parameter sweep: eccentricity offset or shrinking hole radius.
    Sweep(RunArgs),
    /// Comparison integrals and the eccentric upper bound.
    Lemmas(RunArgs),
    /// Nodal-domain counts over the first eigenspace.
    Nodal(RunArgs),
    /// Rayleigh quotient of the perforated-dumbbell neck function.
    Dumbbell(RunArgs),
    /// Two-sided annulus bounds for a star-shaped domain.
    Sandwich(RunArgs),
    /// Small-hole comparison against measure/perimeter-matched annuli.
    Isoperimetric(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV/SVG artifacts.
    #[arg(long)]
    out: PathBuf,
}

const EXIT_ASSERTION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_DIAGNOSTIC: u8 = 3;

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("STEKLOV_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: STEKLOV_THREADS must be a positive integer");
                return ExitCode::from(EXIT_CONFIG);
            }
        }
    }
    let cli = Cli::parse();
    let (args, runner): (&RunArgs, fn(&ExperimentConfig) -> Result<ExperimentOutcome, StageError>) =
        match &cli.command {
            Command::Exact(args) => (args, experiments::run_exact),
            Command::Solve(args) => (args, experiments::run_solve),
            Command::Sweep(args) => (args, experiments::run_sweep),
            Command::Lemmas(args) => (args, experiments::run_lemmas),
            Command::Nodal(args) => (args, experiments::run_nodal),
            Command::Dumbbell(args) => (args, experiments::run_dumbbell),
            Command::Sandwich(args) => (args, experiments::run_sandwich),
            Command::Isoperimetric(args) => (args, experiments::run_isoperimetric),
        };

    let config = match ExperimentConfig::load(&args.config) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let outcome = match runner(&config) {
        Ok(outcome) => outcome,
        Err(StageError::Config(err)) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(StageError::Compute(err)) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(EXIT_DIAGNOSTIC);
        }
    };
    match outcome.emit(&args.out, config.output.plot) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_ASSERTION),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_DIAGNOSTIC)
        }
    }
}
