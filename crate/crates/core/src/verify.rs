//! The proposition-verification suite behind `grwlab verify`, and the data
//! generator behind `grwlab figure1`.
//!
//! Each record compares an analytic value against a measured one (a second
//! analytic route, a bound check, or a Monte Carlo estimate) at a stated
//! tolerance; the verdict is mechanical. Record ids: P1, P2 (piecewise
//! reliability bound for the equal two-branch state), P3 (uniform-prior
//! reliability), P4 (uniform-prior posterior), P5-Helstrom (spectral
//! optimality), P6/dim2 (success-set bounds), PA1 (ensemble
//! indistinguishability), Eopt (closed-form vs spectral optimum), RE1
//! (ray-detector reliability and its Bayes update), RCx (mass-ratio law).

use rand::Rng;

use crate::collapse::{ensemble_density, rho_pair, twin_ensembles};
use crate::discrimination::{
    bayes_posterior, helstrom, mc_reliability, optimal_collapse_detector,
    optimal_reliability_spectral, reliability_mixed, reliability_pure, reliability_two_hypothesis,
    scan_success_sets, YesNoExperiment,
};
use crate::error::{Error, Result};
use crate::grw::{Grid, GridWaveFunction};
use crate::mass::{ghirardi_ratio, Cell, PositionSampler};
use crate::quantum::{
    haar_state, random_effect, Basis, DensityMatrix, Effect, QuantumState, StateVector, C64,
};
use crate::rng::{master_stream, trial_stream};
use crate::stats::binomial_stderr;

/// Tolerance for analytic-vs-analytic comparisons.
pub const ANALYTIC_TOL: f64 = 1e-9;
/// Tolerance for exact-arithmetic identities.
pub const EXACT_TOL: f64 = 1e-12;
/// Monte Carlo agreement band, in standard errors.
pub const MC_SIGMA: f64 = 4.0;

/// One verification record; the verdict derives mechanically from the
/// values.
#[derive(Debug, Clone)]
pub struct VerificationRecord {
    pub id: String,
    pub description: String,
    pub analytic: f64,
    pub measured: f64,
    pub tolerance: f64,
}

impl VerificationRecord {
    pub fn new(id: &str, description: &str, analytic: f64, measured: f64, tolerance: f64) -> Self {
        Self {
            id: id.to_string(),
            description: description.to_string(),
            analytic,
            measured,
            tolerance,
        }
    }

    pub fn pass(&self) -> bool {
        (self.analytic - self.measured).abs() <= self.tolerance
    }
}

/// Suite controls: master seed, Monte Carlo trial budget, worker count.
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    pub trials: usize,
    pub workers: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 42,
            trials: 20_000,
            workers: 0,
        }
    }
}

fn equal_two_branch() -> StateVector {
    StateVector::uniform(2).expect("dimension 2")
}

/// Runs every record of the suite. Deterministic for a given seed.
pub fn run_full_suite(opts: &VerifyOptions) -> Result<Vec<VerificationRecord>> {
    if opts.trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let mut records = Vec::new();
    records.extend(re1_records(opts)?);
    records.extend(bound_records(opts)?);
    records.extend(uniform_prior_records(opts)?);
    records.extend(posterior_records(opts)?);
    records.extend(helstrom_records(opts)?);
    records.extend(success_set_records(opts)?);
    records.extend(ensemble_records(opts)?);
    records.extend(optimal_detector_records(opts)?);
    records.extend(mass_ratio_records(opts)?);
    Ok(records)
}

/// RE1: the ray detector on the equal two-branch state has reliability
/// 1 - p/2 (analytic sweep + Monte Carlo spot check) and its "no" outcome
/// updates the prior to p/(2-p).
fn re1_records(opts: &VerifyOptions) -> Result<Vec<VerificationRecord>> {
    let psi = equal_two_branch();
    let basis = Basis::standard(2)?;
    let exp = YesNoExperiment::leaves_ray_of(&psi);
    let mut max_dev: f64 = 0.0;
    let mut max_bayes_dev: f64 = 0.0;
    for k in 1..=99 {
        let p = k as f64 / 100.0;
        let r = reliability_pure(&psi, &exp, &basis, p)?;
        max_dev = max_dev.max((r - (1.0 - p / 2.0)).abs());
        let post = bayes_posterior(&QuantumState::from(&psi), &exp.povm(), &basis, p, "no")?;
        max_bayes_dev = max_bayes_dev.max((post - p / (2.0 - p)).abs());
    }
    let (mc, stderr) = mc_reliability(
        &psi,
        &exp,
        &basis,
        0.5,
        opts.trials,
        opts.seed,
        opts.workers,
    )?;
    Ok(vec![
        VerificationRecord::new(
            "RE1",
            "ray-detector reliability equals 1 - p/2 (sweep max deviation)",
            0.0,
            max_dev,
            EXACT_TOL,
        ),
        VerificationRecord::new(
            "RE1-mc",
            "ray-detector reliability at p = 0.5, channel Monte Carlo",
            0.75,
            mc,
            MC_SIGMA * stderr,
        ),
        VerificationRecord::new(
            "RE1-bayes",
            "posterior after outcome no equals p/(2-p) (sweep max deviation)",
            0.0,
            max_bayes_dev,
            EXACT_TOL,
        ),
    ])
}

/// P1/P2: no effect beats the piecewise bound on the equal two-branch
/// state: 1 - p/2 below p = 2/3, p above.
fn bound_records(opts: &VerifyOptions) -> Result<Vec<VerificationRecord>> {
    let psi = equal_two_branch();
    let basis = Basis::standard(2)?;
    let mut rng = master_stream(opts.seed ^ 0x100);
    let effects: Vec<Effect> = (0..1000)
        .map(|_| random_effect(2, &mut rng))
        .collect::<Result<_>>()?;
    let mut low_excess: f64 = 0.0;
    let mut high_excess: f64 = 0.0;
    for effect in &effects {
        let exp = YesNoExperiment::new(effect.clone());
        for k in 0..=20 {
            let p = k as f64 / 30.0; // [0, 2/3]
            let r = reliability_pure(&psi, &exp, &basis, p)?;
            low_excess = low_excess.max(r - (1.0 - p / 2.0));
        }
        for k in 0..=10 {
            let p = 2.0 / 3.0 + k as f64 / 30.0; // [2/3, 1]
            let r = reliability_pure(&psi, &exp, &basis, p)?;
            high_excess = high_excess.max(r - p);
        }
    }
    Ok(vec![
        VerificationRecord::new(
            "P1",
            "1000 random effects at p <= 2/3: max excess over 1 - p/2",
            0.0,
            low_excess.max(0.0),
            1e-10,
        ),
        VerificationRecord::new(
            "P2",
            "1000 random effects at p >= 2/3: max excess over p",
            0.0,
            high_excess.max(0.0),
            1e-10,
        ),
    ])
}

/// P3: uniform-prior reliability equals 1 - p - (1-2p) tr(E)/n, matches the
/// Haar Monte Carlo average, and equals 1/2 exactly at p = 1/2.
fn uniform_prior_records(opts: &VerifyOptions) -> Result<Vec<VerificationRecord>> {
    let n = 3;
    let basis = Basis::standard(n)?;
    let rho_u = DensityMatrix::maximally_mixed(n)?;
    let mut rng = master_stream(opts.seed ^ 0x200);
    let effect = random_effect(n, &mut rng)?;
    let exp = YesNoExperiment::new(effect.clone());
    let p = 0.3;
    let analytic = 1.0 - p - (1.0 - 2.0 * p) * effect.operator().trace() / n as f64;

    // Haar Monte Carlo: average the per-state reliability.
    let samples = opts.trials;
    let a = crate::discrimination::retrodiction_operator(&exp, &basis, p)?;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for t in 0..samples as u64 {
        let mut srng = trial_stream(opts.seed ^ 0x201, t);
        let psi = haar_state(n, &mut srng)?;
        let r = a.expectation(&psi)?;
        sum += r;
        sum_sq += r * r;
    }
    let mean = sum / samples as f64;
    let var = (sum_sq / samples as f64 - mean * mean).max(0.0);
    let stderr = (var / samples as f64).sqrt();

    let at_half = reliability_mixed(&rho_u, &exp, &basis, 0.5)?;
    Ok(vec![
        VerificationRecord::new(
            "P3",
            "uniform-prior reliability formula vs Haar Monte Carlo",
            analytic,
            mean,
            MC_SIGMA * stderr,
        ),
        VerificationRecord::new(
            "P3-half",
            "uniform prior at p = 1/2 yields exactly 1/2",
            0.5,
            at_half,
            EXACT_TOL,
        ),
    ])
}

/// P4: with a maximally-mixed prior the posterior equals the prior for every
/// outcome of random POVMs.
fn posterior_records(opts: &VerifyOptions) -> Result<Vec<VerificationRecord>> {
    let n = 3;
    let basis = Basis::standard(n)?;
    let rho = DensityMatrix::maximally_mixed(n)?;
    let mut rng = master_stream(opts.seed ^ 0x300);
    let mut max_dev: f64 = 0.0;
    for _ in 0..100 {
        let outcomes = 2 + (rng.random::<u32>() % 3) as usize;
        let povm = crate::quantum::random_povm(n, outcomes, &mut rng)?;
        for p in [0.2, 0.5, 0.8] {
            for (label, _) in povm.effects() {
                let post = bayes_posterior(&QuantumState::from(&rho), &povm, &basis, p, label)?;
                max_dev = max_dev.max((post - p).abs());
            }
        }
    }
    Ok(vec![VerificationRecord::new(
        "P4",
        "uniform-prior posterior equals the prior across 100 random POVMs",
        0.0,
        max_dev,
        EXACT_TOL,
    )])
}

/// P5-Helstrom: the spectral optimum dominates random effects and agrees
/// with its own two-hypothesis reliability.
fn helstrom_records(opts: &VerifyOptions) -> Result<Vec<VerificationRecord>> {
    let mut rng = master_stream(opts.seed ^ 0x400);
    let mut max_excess: f64 = 0.0;
    let mut max_self_dev: f64 = 0.0;
    for n in [2usize, 3, 4] {
        let basis = Basis::standard(n)?;
        let psi = haar_state(n, &mut rng)?;
        let (rho1, rho2) = rho_pair(&psi, &basis)?;
        for p in [0.25, 0.5, 0.75] {
            let (best_effect, best) = helstrom(&rho1, &rho2, p, None)?;
            let self_r = reliability_two_hypothesis(&rho1, &rho2, &best_effect, p)?;
            max_self_dev = max_self_dev.max((best - self_r).abs());
            for _ in 0..1000 {
                let e = random_effect(n, &mut rng)?;
                let r = reliability_two_hypothesis(&rho1, &rho2, &e, p)?;
                max_excess = max_excess.max(r - best);
            }
        }
    }
    Ok(vec![
        VerificationRecord::new(
            "P5-Helstrom",
            "max excess of 1000 random effects over the spectral optimum",
            0.0,
            max_excess.max(0.0),
            1e-10,
        ),
        VerificationRecord::new(
            "P5-Helstrom-self",
            "spectral optimum equals its own two-hypothesis reliability",
            0.0,
            max_self_dev,
            1e-10,
        ),
    ])
}

/// P6 / dim2 / ceiling: success-set estimates stay below 1/2 (small prior,
/// and any prior at n = 2) and below 1 - 1/e everywhere in the scan.
fn success_set_records(opts: &VerifyOptions) -> Result<Vec<VerificationRecord>> {
    let samples = opts.trials.max(1000);
    let effects_per_case = 20;
    let mut p6_excess: f64 = 0.0;
    let mut dim2_excess: f64 = 0.0;
    let mut ceiling_excess: f64 = 0.0;

    // Small prior p = 0.1, dimensions 2..4, random effects and ray
    // detectors.
    for n in [2usize, 3, 4] {
        let basis = Basis::standard(n)?;
        let family = scan_family(n, effects_per_case, opts.seed ^ 0x500 ^ n as u64)?;
        let rows = scan_success_sets(
            &family,
            &basis,
            0.1,
            samples,
            opts.seed ^ 0x501,
            opts.workers,
        )?;
        for row in rows {
            p6_excess = p6_excess.max(row.estimate - (0.5 + MC_SIGMA * row.stderr));
            ceiling_excess =
                ceiling_excess.max(row.estimate - (1.0 - (-1.0f64).exp() + MC_SIGMA * row.stderr));
        }
    }
    // n = 2 across the full prior range.
    let basis2 = Basis::standard(2)?;
    let family2 = scan_family(2, effects_per_case, opts.seed ^ 0x502)?;
    for k in 0..=10 {
        let p = k as f64 / 10.0;
        let rows = scan_success_sets(
            &family2,
            &basis2,
            p,
            samples,
            opts.seed ^ 0x503,
            opts.workers,
        )?;
        for row in rows {
            dim2_excess = dim2_excess.max(row.estimate - (0.5 + MC_SIGMA * row.stderr));
            ceiling_excess =
                ceiling_excess.max(row.estimate - (1.0 - (-1.0f64).exp() + MC_SIGMA * row.stderr));
        }
    }
    Ok(vec![
        VerificationRecord::new(
            "P6",
            "success sets at p = 0.1 stay within 1/2 (max excess over 4-sigma band)",
            0.0,
            p6_excess.max(0.0),
            0.0,
        ),
        VerificationRecord::new(
            "dim2",
            "success sets at n = 2 stay within 1/2 for all p (max excess)",
            0.0,
            dim2_excess.max(0.0),
            0.0,
        ),
        VerificationRecord::new(
            "scan-ceiling",
            "no success-set estimate exceeds 1 - 1/e (max excess)",
            0.0,
            ceiling_excess.max(0.0),
            0.0,
        ),
    ])
}

/// Mixed family for success-set scans: half random effects, half ray
/// detectors I - |phi><phi| with Haar phi.
pub fn scan_family(n: usize, count: usize, seed: u64) -> Result<Vec<(String, Effect)>> {
    let mut rng = master_stream(seed);
    let mut family = Vec::with_capacity(count);
    for k in 0..count {
        if k % 2 == 0 {
            family.push((format!("random-{k}"), random_effect(n, &mut rng)?));
        } else {
            let phi = haar_state(n, &mut rng)?;
            family.push((
                format!("ray-{k}"),
                Effect::projector_onto(&phi).complement(),
            ));
        }
    }
    Ok(family)
}

/// PA1: ensembles with equal density matrices give identical outcome
/// statistics for every POVM.
fn ensemble_records(opts: &VerifyOptions) -> Result<Vec<VerificationRecord>> {
    let mut rng = master_stream(opts.seed ^ 0x600);
    let mut max_dev: f64 = 0.0;
    for n in [2usize, 3] {
        let (mu1, mu2) = twin_ensembles(n)?;
        let rho1 = ensemble_density(&mu1, 0, &mut rng)?.rho;
        let rho2 = ensemble_density(&mu2, 0, &mut rng)?.rho;
        for _ in 0..100 {
            let povm = crate::quantum::random_povm(n, 3, &mut rng)?;
            for (_, effect) in povm.effects() {
                let p1 = rho1.operator().trace_product(effect.operator())?;
                let p2 = rho2.operator().trace_product(effect.operator())?;
                max_dev = max_dev.max((p1 - p2).abs());
            }
        }
    }
    Ok(vec![VerificationRecord::new(
        "PA1",
        "twin ensembles give equal outcome probabilities for 100 random POVMs",
        0.0,
        max_dev,
        EXACT_TOL,
    )])
}

/// Eopt: the closed-form optimal reliability equals the spectral optimum for
/// Haar states across dimensions, off the branch point, and saturates the
/// 1 - p/n bound for the uniform state.
fn optimal_detector_records(opts: &VerifyOptions) -> Result<Vec<VerificationRecord>> {
    let mut max_dev: f64 = 0.0;
    for n in [2usize, 3, 4, 8] {
        let basis = Basis::standard(n)?;
        let branch_point = n as f64 / (n as f64 + 1.0);
        for s in 0..30u64 {
            let mut rng = trial_stream(opts.seed ^ 0x700 ^ n as u64, s);
            let psi = haar_state(n, &mut rng)?;
            for k in 1..=9 {
                let p = k as f64 / 10.0;
                if (p - branch_point).abs() < 1e-6 {
                    continue;
                }
                let closed = optimal_collapse_detector(&psi, &basis, p)?.reliability;
                let spectral = optimal_reliability_spectral(&psi, &basis, p)?;
                max_dev = max_dev.max((closed - spectral).abs());
            }
        }
    }
    let mut saturation_dev: f64 = 0.0;
    for n in 1..=8usize {
        let psi = StateVector::uniform(n)?;
        let basis = Basis::standard(n)?;
        let branch_point = n as f64 / (n as f64 + 1.0);
        for k in 1..=9 {
            let p = k as f64 / 10.0;
            if p > branch_point - 1e-9 {
                continue;
            }
            let closed = optimal_collapse_detector(&psi, &basis, p)?.reliability;
            saturation_dev = saturation_dev.max((closed - (1.0 - p / n as f64)).abs());
        }
    }
    Ok(vec![
        VerificationRecord::new(
            "Eopt",
            "closed-form optimum vs spectral optimum, Haar states, n in {2,3,4,8}",
            0.0,
            max_dev,
            ANALYTIC_TOL,
        ),
        VerificationRecord::new(
            "Eopt-saturation",
            "uniform state reaches 1 - p/n exactly",
            0.0,
            saturation_dev,
            EXACT_TOL,
        ),
    ])
}

/// RCx: on a two-branch state the exact cell ratio equals sqrt(q/p), and the
/// sampled estimator reproduces it as std/mean.
fn mass_ratio_records(opts: &VerifyOptions) -> Result<Vec<VerificationRecord>> {
    let grid = Grid::new(1, 64, 16.0)?;
    let p = 0.5;
    let psi = two_branch_top_hats(&grid, p)?;
    let cell = Cell { start: 8, len: 8 };
    let exact = ghirardi_ratio(&psi, cell, &[1.0])?;
    let expected = ((1.0 - p) / p).sqrt();

    let sampler = PositionSampler::new(&psi);
    let draws = opts.trials;
    let mut values = Vec::with_capacity(draws);
    for t in 0..draws as u64 {
        let mut rng = trial_stream(opts.seed ^ 0x800, t);
        let q = sampler.sample(&mut rng);
        let inside = cell.contains(q.indices[0], grid.points);
        values.push(if inside {
            1.0 / cell.length(&grid)
        } else {
            0.0
        });
    }
    let (mean, std) = crate::stats::mean_std(&values);
    let mc_ratio = std / mean;
    let p_hat = values.iter().filter(|&&v| v > 0.0).count() as f64 / draws as f64;
    let sigma_p = binomial_stderr(p_hat, draws);
    let dgdp = (p_hat / (1.0 - p_hat)).sqrt() / (2.0 * p_hat * p_hat);
    Ok(vec![
        VerificationRecord::new(
            "RCx",
            "two-branch cell ratio equals sqrt(q/p)",
            expected,
            exact,
            EXACT_TOL,
        ),
        VerificationRecord::new(
            "RCx-mc",
            "sampled estimator std/mean reproduces the exact ratio",
            exact,
            mc_ratio,
            MC_SIGMA * dgdp * sigma_p,
        ),
    ])
}

/// Normalized pair of disjoint top-hats with probability weights p and 1-p,
/// the first inside the cell nodes 8..16.
pub fn two_branch_top_hats(grid: &Grid, p: f64) -> Result<GridWaveFunction> {
    use ndarray::{ArrayD, IxDyn};
    let mut data = ArrayD::<C64>::zeros(IxDyn(&grid.shape()));
    let branch = |start: usize, len: usize, weight: f64| {
        let amp = (weight / (len as f64 * grid.spacing())).sqrt();
        (start..start + len).map(move |j| (j, amp))
    };
    for (j, amp) in branch(8, 4, p).chain(branch(40, 4, 1.0 - p)) {
        data[IxDyn(&[j])] = C64::new(amp, 0.0);
    }
    GridWaveFunction::new(data, grid.clone())
}

/// One row of the figure-1 style sweep: reliabilities of blind guessing, the
/// ray detector, and the optimal detector, analytic and Monte Carlo.
#[derive(Debug, Clone)]
pub struct Figure1Row {
    pub p: f64,
    pub blind: f64,
    pub e1_analytic: f64,
    pub e1_mc: f64,
    pub e1_stderr: f64,
    pub optimal_analytic: f64,
    pub optimal_mc: f64,
    pub optimal_stderr: f64,
}

/// Sweeps the collapse prior for the equal two-branch state at n = 2.
pub fn figure1_rows(
    p_grid: &[f64],
    trials: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<Figure1Row>> {
    let psi = equal_two_branch();
    let basis = Basis::standard(2)?;
    let ray = YesNoExperiment::leaves_ray_of(&psi);
    let (rho1, rho2) = rho_pair(&psi, &basis)?;
    p_grid
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!(
                    "grid value {p} not in [0,1]"
                )));
            }
            let e1_analytic = reliability_pure(&psi, &ray, &basis, p)?;
            let (e1_mc, e1_stderr) = mc_reliability(
                &psi,
                &ray,
                &basis,
                p,
                trials,
                seed.wrapping_add(2 * i as u64),
                workers,
            )?;
            let (optimal_effect, optimal_analytic) = helstrom(&rho1, &rho2, p, None)?;
            let optimal_exp = YesNoExperiment::new(optimal_effect);
            let (optimal_mc, optimal_stderr) = mc_reliability(
                &psi,
                &optimal_exp,
                &basis,
                p,
                trials,
                seed.wrapping_add(2 * i as u64 + 1),
                workers,
            )?;
            Ok(Figure1Row {
                p,
                blind: p.max(1.0 - p),
                e1_analytic,
                e1_mc,
                e1_stderr,
                optimal_analytic,
                optimal_mc,
                optimal_stderr,
            })
        })
        .collect()
}

/// Standard verification POVM sanity check used by tests: every record id is
/// unique.
pub fn ids_are_unique(records: &[VerificationRecord]) -> bool {
    let mut ids: Vec<&str> = records.iter().map(|r| r.id.as_str()).collect();
    ids.sort_unstable();
    ids.windows(2).all(|w| w[0] != w[1])
}
