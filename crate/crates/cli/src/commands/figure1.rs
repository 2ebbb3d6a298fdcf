//! `grwlab figure1`: reliability-vs-prior sweep as CSV.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use grwlab_core::verify::figure1_rows;

use crate::output;

#[derive(Parser)]
pub struct Args {
    /// Number of equal steps in the prior grid 0..=1.
    #[arg(long, default_value_t = 10)]
    pub p_steps: usize,
    /// Explicit comma-separated prior grid (overrides --p-steps).
    #[arg(long, value_delimiter = ',')]
    pub p_grid: Vec<f64>,
    /// Monte Carlo trials per grid point and experiment.
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    /// Master seed.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads (0 = rayon default).
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &Args) -> Result<ExitCode> {
    anyhow::ensure!(args.p_steps >= 1, "p-steps must be at least 1");
    anyhow::ensure!(args.trials >= 1, "trials must be at least 1");
    let p_grid: Vec<f64> = if args.p_grid.is_empty() {
        (0..=args.p_steps)
            .map(|k| k as f64 / args.p_steps as f64)
            .collect()
    } else {
        args.p_grid.clone()
    };
    let rows = figure1_rows(&p_grid, args.trials, args.seed, args.workers)?;

    let params = format!(
        "figure1 p_grid={p_grid:?} trials={} seed={}",
        args.trials, args.seed
    );
    let hash = output::config_hash(&params);
    let mut sink = output::open_sink(args.out.as_ref())?;
    output::write_header(&mut *sink, "figure1", args.seed, &hash)?;
    writeln!(
        sink,
        "p,blind,e1_analytic,e1_mc,e1_stderr,optimal_analytic,optimal_mc,optimal_stderr"
    )?;
    for row in &rows {
        writeln!(
            sink,
            "{},{},{},{},{},{},{},{}",
            output::fmt_num(row.p),
            output::fmt_num(row.blind),
            output::fmt_num(row.e1_analytic),
            output::fmt_num(row.e1_mc),
            output::fmt_num(row.e1_stderr),
            output::fmt_num(row.optimal_analytic),
            output::fmt_num(row.optimal_mc),
            output::fmt_num(row.optimal_stderr)
        )?;
    }
    sink.flush()?;
    Ok(ExitCode::SUCCESS)
}

use std::io::Write;
