//! `grwlab scan`: success-set measures for a family of detectors.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use grwlab_core::discrimination::scan_success_sets;
use grwlab_core::quantum::Basis;
use grwlab_core::verify::scan_family;

use crate::output;

#[derive(Parser)]
pub struct Args {
    /// Hilbert-space dimension.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Collapse prior.
    #[arg(long, default_value_t = 0.4)]
    pub p: f64,
    /// Number of detectors (alternating random effects and ray detectors).
    #[arg(long, default_value_t = 100)]
    pub family_size: usize,
    /// Haar samples per detector.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
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
    anyhow::ensure!((0.0..=1.0).contains(&args.p), "p must lie in [0,1]");
    anyhow::ensure!(args.n >= 1, "dimension must be at least 1");
    let basis = Basis::standard(args.n)?;
    let family = scan_family(args.n, args.family_size, args.seed ^ 0xF00)?;
    let rows = scan_success_sets(
        &family,
        &basis,
        args.p,
        args.samples,
        args.seed,
        args.workers,
    )?;

    let params = format!(
        "scan n={} p={} family_size={} samples={} seed={}",
        args.n, args.p, args.family_size, args.samples, args.seed
    );
    let hash = output::config_hash(&params);
    let mut sink = output::open_sink(args.out.as_ref())?;
    output::write_header(&mut *sink, "scan", args.seed, &hash)?;
    writeln!(
        sink,
        "effect_id,estimate,stderr,beats_half,ceiling_violation"
    )?;
    for row in &rows {
        writeln!(
            sink,
            "{},{},{},{},{}",
            row.effect_id,
            output::fmt_num(row.estimate),
            output::fmt_num(row.stderr),
            row.beats_half,
            row.ceiling_violation
        )?;
    }
    sink.flush()?;

    let best = rows.iter().max_by(|a, b| a.estimate.total_cmp(&b.estimate));
    if let Some(best) = best {
        eprintln!(
            "max success-set estimate: {} at {} (stderr {:.2e}); ceiling violations: {}",
            best.estimate,
            best.effect_id,
            best.stderr,
            rows.iter().filter(|r| r.ceiling_violation).count()
        );
    }
    Ok(ExitCode::SUCCESS)
}
