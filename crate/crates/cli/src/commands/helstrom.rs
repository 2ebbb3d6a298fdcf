//! `grwlab helstrom`: optimal discrimination of two density matrices read
//! from a JSON file.
//!
//! Input schema:
//! ```json
//! {
//!   "p": 0.5,
//!   "rho1": { "re": [[...], ...], "im": [[...], ...] },
//!   "rho2": { "re": [[...], ...], "im": [[...], ...] }
//! }
//! ```
//! `im` may be omitted for real matrices.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use grwlab_core::discrimination::helstrom;
use grwlab_core::quantum::{CMatrix, DensityMatrix, HermitianOperator, C64};
use serde::{Deserialize, Serialize};

use crate::output;

#[derive(Parser)]
pub struct Args {
    /// Input JSON with fields p, rho1, rho2.
    #[arg(long)]
    pub input: PathBuf,
    /// Override the prior from the file.
    #[arg(long)]
    pub p: Option<f64>,
    /// Optional JSON output with the optimal effect.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Deserialize)]
struct MatrixJson {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

#[derive(Deserialize)]
struct InputJson {
    p: f64,
    rho1: MatrixJson,
    rho2: MatrixJson,
}

#[derive(Serialize)]
struct MatrixOut {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct OutputJson {
    p: f64,
    max_reliability: f64,
    blind_guess: f64,
    effect: MatrixOut,
}

fn parse_matrix(m: &MatrixJson) -> Result<CMatrix> {
    let n = m.re.len();
    anyhow::ensure!(n > 0, "matrix is empty");
    anyhow::ensure!(m.re.iter().all(|row| row.len() == n), "re is not square");
    if let Some(im) = &m.im {
        anyhow::ensure!(
            im.len() == n && im.iter().all(|row| row.len() == n),
            "im shape mismatch"
        );
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        let re = m.re[i][j];
        let im = m.im.as_ref().map_or(0.0, |im| im[i][j]);
        C64::new(re, im)
    }))
}

fn matrix_out(m: &CMatrix) -> MatrixOut {
    let n = m.nrows();
    MatrixOut {
        re: (0..n)
            .map(|i| (0..n).map(|j| m[(i, j)].re).collect())
            .collect(),
        im: (0..n)
            .map(|i| (0..n).map(|j| m[(i, j)].im).collect())
            .collect(),
    }
}

pub fn run(args: &Args) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let input: InputJson =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", args.input.display()))?;
    let p = args.p.unwrap_or(input.p);
    anyhow::ensure!((0.0..=1.0).contains(&p), "p must lie in [0,1]");

    let rho1 = DensityMatrix::new(HermitianOperator::new(parse_matrix(&input.rho1)?)?)?;
    let rho2 = DensityMatrix::new(HermitianOperator::new(parse_matrix(&input.rho2)?)?)?;
    let (effect, max_reliability) = helstrom(&rho1, &rho2, p, None)?;
    let blind = p.max(1.0 - p);

    println!("p = {p}");
    println!("blind guessing reliability = {blind}");
    println!("optimal reliability        = {max_reliability}");
    println!("advantage over blind       = {}", max_reliability - blind);

    if let Some(out) = &args.out {
        let payload = OutputJson {
            p,
            max_reliability,
            blind_guess: blind,
            effect: matrix_out(effect.operator().matrix()),
        };
        let mut sink = output::open_sink(Some(out))?;
        serde_json::to_writer_pretty(&mut *sink, &payload)?;
        sink.write_all(b"\n")?;
        sink.flush()?;
    }
    Ok(ExitCode::SUCCESS)
}
