//! `grwlab`: command-line experiments on collapse detection and mass-density
//! measurability.
//!
//! Exit codes: 0 on success, 1 when a verification record fails (or on
//! runtime/I-O errors), 2 on configuration errors.

mod commands;
mod output;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "grwlab",
    version,
    about = "Spontaneous-collapse (GRW) dynamics: detection limits, optimal detectors, mass-density measurability"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reliability sweep for the equal two-branch state: blind guessing,
    /// the ray detector, and the optimal detector, analytic and Monte Carlo.
    Figure1(commands::figure1::Args),
    /// Run the proposition-verification suite; nonzero exit iff any record
    /// fails.
    Verify(commands::verify::Args),
    /// Simulate the GRW process from a config file; write flashes (JSONL)
    /// and mass-density snapshots (CSV).
    GrwRun(commands::grw_run::Args),
    /// Success-set scan: how often fixed detectors beat blind guessing on
    /// Haar random states.
    Scan(commands::scan::Args),
    /// Mass-density measurability: cell ratios across coarse-graining
    /// scales for a configured initial state.
    Massdensity(commands::massdensity::Args),
    /// Optimal discrimination of two density matrices loaded from JSON.
    Helstrom(commands::helstrom::Args),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Figure1(args) => commands::figure1::run(&args),
        Command::Verify(args) => commands::verify::run(&args),
        Command::GrwRun(args) => commands::grw_run::run(&args),
        Command::Scan(args) => commands::scan::run(&args),
        Command::Massdensity(args) => commands::massdensity::run(&args),
        Command::Helstrom(args) => commands::helstrom::run(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if is_config_error(&err) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

/// Config-shaped failures exit with code 2.
fn is_config_error(err: &anyhow::Error) -> bool {
    if let Some(core_err) = err.downcast_ref::<grwlab_core::Error>() {
        return matches!(
            core_err,
            grwlab_core::Error::Config { .. } | grwlab_core::Error::MemoryBudget { .. }
        );
    }
    err.downcast_ref::<commands::ConfigLoadError>().is_some()
}
