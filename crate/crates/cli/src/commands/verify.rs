//! `grwlab verify`: run the proposition suite, print a verdict table, exit
//! nonzero if anything fails.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use grwlab_core::verify::{run_full_suite, VerificationRecord, VerifyOptions};

use crate::output;

#[derive(Parser)]
pub struct Args {
    /// Monte Carlo trial budget per record.
    #[arg(long, default_value_t = 20_000)]
    pub trials: usize,
    /// Master seed.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads (0 = rayon default).
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Multiplier applied to every record tolerance (0 exposes raw
    /// deviations as failures).
    #[arg(long, default_value_t = 1.0)]
    pub tolerance: f64,
    /// Optional CSV report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn apply_tolerance_scale(records: &mut [VerificationRecord], scale: f64) {
    for record in records {
        record.tolerance *= scale;
    }
}

pub fn run(args: &Args) -> Result<ExitCode> {
    let opts = VerifyOptions {
        seed: args.seed,
        trials: args.trials,
        workers: args.workers,
    };
    let mut records = run_full_suite(&opts)?;
    apply_tolerance_scale(&mut records, args.tolerance);

    let params = format!(
        "verify trials={} seed={} tolerance={}",
        args.trials, args.seed, args.tolerance
    );
    let hash = output::config_hash(&params);

    println!(
        "{:<18} {:>14} {:>14} {:>10}  {:<7} description",
        "id", "analytic", "measured", "tol", "verdict"
    );
    let mut failures = 0usize;
    for record in &records {
        let verdict = if record.pass() { "pass" } else { "FAIL" };
        if !record.pass() {
            failures += 1;
        }
        println!(
            "{:<18} {:>14.6e} {:>14.6e} {:>10.2e}  {:<7} {}",
            record.id,
            record.analytic,
            record.measured,
            record.tolerance,
            verdict,
            record.description
        );
    }
    println!(
        "{} records, {} failed (seed {}, trials {})",
        records.len(),
        failures,
        args.seed,
        args.trials
    );

    if let Some(out) = &args.out {
        let mut sink = output::open_sink(Some(out))?;
        output::write_header(&mut *sink, "verify", args.seed, &hash)?;
        writeln!(sink, "id,analytic,measured,tolerance,verdict,description")?;
        for record in &records {
            writeln!(
                sink,
                "{},{},{},{},{},{}",
                record.id,
                output::fmt_num(record.analytic),
                output::fmt_num(record.measured),
                output::fmt_num(record.tolerance),
                if record.pass() { "pass" } else { "fail" },
                record.description
            )?;
        }
        sink.flush()?;
    }

    Ok(if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
