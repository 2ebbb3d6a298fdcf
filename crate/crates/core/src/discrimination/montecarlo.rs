//! Monte Carlo verification of reliability values: the exact collapse
//! channel followed by a sampled measurement, counted over per-trial random
//! streams.

use rayon::prelude::*;

use super::{reliability_bound, reliability_pure, YesNoExperiment};
use crate::collapse::{apply_collapse, CollapseChannel};
use crate::error::Result;
use crate::quantum::{sample_outcome, Basis, QuantumState, StateVector};
use crate::rng::{trial_stream, with_workers};
use crate::stats::binomial_stderr;

/// Per-experiment record comparing the analytic reliability with its Monte
/// Carlo estimate.
#[derive(Debug, Clone)]
pub struct ReliabilityReport {
    pub p: f64,
    pub analytic: f64,
    pub monte_carlo: f64,
    pub stderr: f64,
    /// Dimension bound on any experiment's reliability at this p.
    pub bound: f64,
    pub trials: usize,
}

impl ReliabilityReport {
    /// Whether the estimate agrees with the analytic value within
    /// `k_sigma` standard errors.
    pub fn passes(&self, k_sigma: f64) -> bool {
        (self.analytic - self.monte_carlo).abs() <= k_sigma * self.stderr + f64::EPSILON
    }
}

/// Estimates the reliability of a yes/no experiment by simulating the
/// collapse channel and the measurement, `trials` times.
///
/// Trial t draws from stream t of `seed`, so the estimate is bit-identical
/// for a given seed regardless of `workers`.
pub fn mc_reliability(
    psi: &StateVector,
    exp: &YesNoExperiment,
    basis: &Basis,
    p: f64,
    trials: usize,
    seed: u64,
    workers: usize,
) -> Result<(f64, f64)> {
    let channel = CollapseChannel::new(basis.clone(), p)?;
    let povm = exp.povm();
    let correct: u64 = with_workers(workers, || {
        (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_stream(seed, t);
                let outcome = apply_collapse(&channel, psi, &mut rng)
                    .expect("channel and state dimensions were validated");
                let label =
                    sample_outcome(&QuantumState::Pure(outcome.post_state), &povm, &mut rng)
                        .expect("yes/no POVM probabilities sum to 1");
                let guessed_collapse = label == "yes";
                u64::from(guessed_collapse == outcome.collapsed)
            })
            .sum()
    });
    let estimate = correct as f64 / trials as f64;
    Ok((estimate, binomial_stderr(estimate, trials)))
}

/// Runs [`mc_reliability`] and packages it against the analytic value and
/// the dimension bound.
pub fn reliability_report(
    psi: &StateVector,
    exp: &YesNoExperiment,
    basis: &Basis,
    p: f64,
    trials: usize,
    seed: u64,
    workers: usize,
) -> Result<ReliabilityReport> {
    let analytic = reliability_pure(psi, exp, basis, p)?;
    let (monte_carlo, stderr) = mc_reliability(psi, exp, basis, p, trials, seed, workers)?;
    Ok(ReliabilityReport {
        p,
        analytic,
        monte_carlo,
        stderr,
        bound: reliability_bound(psi.dim(), p)?,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{haar_state, random_effect};
    use crate::rng::master_stream;

    #[test]
    fn mc_matches_analytic_for_ray_detector() {
        let psi = StateVector::uniform(2).unwrap();
        let basis = Basis::standard(2).unwrap();
        let exp = YesNoExperiment::leaves_ray_of(&psi);
        let report = reliability_report(&psi, &exp, &basis, 0.4, 50_000, 60, 0).unwrap();
        assert!((report.analytic - 0.8).abs() < 1e-12);
        assert!(
            report.passes(4.0),
            "mc {} vs analytic {}",
            report.monte_carlo,
            report.analytic
        );
        assert!(report.monte_carlo <= report.bound + 4.0 * report.stderr);
    }

    #[test]
    fn mc_matches_analytic_for_random_effect() {
        // Simulation oracle for the retrodiction-operator formula at n = 3.
        let mut rng = master_stream(61);
        let psi = haar_state(3, &mut rng).unwrap();
        let basis = Basis::standard(3).unwrap();
        let exp = YesNoExperiment::new(random_effect(3, &mut rng).unwrap());
        let report = reliability_report(&psi, &exp, &basis, 0.3, 1_000_000, 62, 0).unwrap();
        assert!(
            report.passes(4.0),
            "mc {} vs analytic {}",
            report.monte_carlo,
            report.analytic
        );
    }

    #[test]
    fn mc_is_deterministic_and_worker_independent() {
        let psi = StateVector::uniform(2).unwrap();
        let basis = Basis::standard(2).unwrap();
        let exp = YesNoExperiment::leaves_ray_of(&psi);
        let (a, _) = mc_reliability(&psi, &exp, &basis, 0.4, 20_000, 63, 1).unwrap();
        let (b, _) = mc_reliability(&psi, &exp, &basis, 0.4, 20_000, 63, 4).unwrap();
        let (c, _) = mc_reliability(&psi, &exp, &basis, 0.4, 20_000, 63, 0).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(a.to_bits(), c.to_bits());
    }

    #[test]
    fn constant_experiments_have_exact_frequencies() {
        let psi = StateVector::uniform(2).unwrap();
        let basis = Basis::standard(2).unwrap();
        // E = 0 answers "no" always: correct exactly when no collapse fired.
        let (est, _) = mc_reliability(
            &psi,
            &YesNoExperiment::always_no(2),
            &basis,
            0.0,
            5_000,
            64,
            0,
        )
        .unwrap();
        assert_eq!(est, 1.0);
        let (est, _) = mc_reliability(
            &psi,
            &YesNoExperiment::always_yes(2),
            &basis,
            1.0,
            5_000,
            65,
            0,
        )
        .unwrap();
        assert_eq!(est, 1.0);
    }
}
