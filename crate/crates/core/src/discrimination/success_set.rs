//! Success-set scans — how broadly useful a fixed detector is across Haar
//! random states — and the repeated non-disturbing projective measurement
//! experiment.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use super::YesNoExperiment;
use crate::error::{Error, Result};
use crate::quantum::{born_probability, haar_state, Basis, Effect, QuantumState, StateVector, C64};
use crate::rng::{trial_stream, with_workers};
use crate::stats::binomial_stderr;

/// Strict-inequality margin: a state counts as a success only when its
/// reliability beats blind guessing by more than this, so ties are excluded.
pub const SUCCESS_MARGIN: f64 = 1e-12;

/// Haar measure of the success set: the fraction of Haar states on which
/// the experiment is strictly more reliable than blind guessing.
///
/// Returns the binomial estimate and its standard error.
pub fn success_set_measure(
    exp: &YesNoExperiment,
    basis: &Basis,
    p: f64,
    samples: usize,
    seed: u64,
    workers: usize,
) -> Result<(f64, f64)> {
    if samples < 1000 {
        return Err(Error::InvalidArgument(
            "success-set estimation needs at least 1000 samples".into(),
        ));
    }
    let n = exp.dim();
    let blind = p.max(1.0 - p);
    // The retrodiction operator does not depend on the sampled state; build
    // it once and evaluate only the quadratic form per draw.
    let a = super::retrodiction_operator(exp, basis, p)?;
    let hits: u64 = with_workers(workers, || {
        (0..samples as u64)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_stream(seed, t);
                let psi = haar_state(n, &mut rng).expect("n >= 1");
                let r = a
                    .expectation(&psi)
                    .expect("matching dimensions were validated");
                u64::from(r > blind + SUCCESS_MARGIN)
            })
            .sum()
    });
    let estimate = hits as f64 / samples as f64;
    Ok((estimate, binomial_stderr(estimate, samples)))
}

/// One row of a success-set scan.
#[derive(Debug, Clone)]
pub struct ScanRow {
    pub effect_id: String,
    pub estimate: f64,
    pub stderr: f64,
    /// Estimate exceeds 1/2 by more than 4 standard errors.
    pub beats_half: bool,
    /// Estimate exceeds 1 - 1/e by more than 4 standard errors — flagged as
    /// a finding against the scan's working ceiling.
    pub ceiling_violation: bool,
}

/// Evaluates [`success_set_measure`] over a family of labeled effects.
///
/// Rows report each detector's success-set estimate; any estimate exceeding
/// 1 - 1/e beyond 4 standard errors is flagged.
pub fn scan_success_sets(
    family: &[(String, Effect)],
    basis: &Basis,
    p: f64,
    samples: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<ScanRow>> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("detector family is empty".into()));
    }
    let ceiling = 1.0 - (-1.0f64).exp();
    family
        .iter()
        .enumerate()
        .map(|(idx, (id, effect))| {
            let exp = YesNoExperiment::new(effect.clone());
            // Distinct seeds per effect keep rows independent.
            let (estimate, stderr) = success_set_measure(
                &exp,
                basis,
                p,
                samples,
                seed.wrapping_add(idx as u64),
                workers,
            )?;
            Ok(ScanRow {
                effect_id: id.clone(),
                estimate,
                stderr,
                beats_half: estimate > 0.5 + 4.0 * stderr,
                ceiling_violation: estimate > ceiling + 4.0 * stderr,
            })
        })
        .collect()
}

/// Frequencies of outcome strings ("y"/"n" per repetition) for one prepared
/// state.
#[derive(Debug, Clone)]
pub struct OutcomeTable {
    pub state_index: usize,
    pub frequencies: BTreeMap<String, f64>,
    pub trials: usize,
}

impl OutcomeTable {
    pub fn frequency(&self, outcome: &str) -> f64 {
        self.frequencies.get(outcome).copied().unwrap_or(0.0)
    }
}

/// Simulates `reps` successive projective (Lüders) measurements of
/// {E, I-E} on each state of the family, `trials` times, and tabulates the
/// outcome-string frequencies.
///
/// Only projective effects are supported: the post-outcome state is the
/// normalized projection, so repeating the measurement repeats the outcome.
pub fn repeated_measurement_experiment(
    family: &[StateVector],
    projective_effect: &Effect,
    reps: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<OutcomeTable>> {
    if !projective_effect.is_projector(1e-10) {
        return Err(Error::UnsupportedInstrument(
            "repeated measurement requires an idempotent effect".into(),
        ));
    }
    if reps == 0 || trials == 0 {
        return Err(Error::InvalidArgument(
            "reps and trials must be positive".into(),
        ));
    }
    let e_yes = projective_effect;
    let e_no = projective_effect.complement();
    family
        .iter()
        .enumerate()
        .map(|(state_index, psi0)| {
            let mut counts: BTreeMap<String, usize> = BTreeMap::new();
            for t in 0..trials as u64 {
                let mut rng = trial_stream(seed.wrapping_add(state_index as u64), t);
                let mut psi = psi0.clone();
                let mut outcome = String::with_capacity(reps);
                for _ in 0..reps {
                    let p_yes = born_probability(&QuantumState::from(&psi), e_yes)?;
                    let yes = rng.random::<f64>() < p_yes;
                    outcome.push(if yes { 'y' } else { 'n' });
                    let projector = if yes { e_yes } else { &e_no };
                    let projected = projector.operator().matrix() * psi.amplitudes();
                    let norm = projected.norm();
                    if norm <= 0.0 {
                        return Err(Error::Numerical(
                            "projection annihilated the state despite a positive Born weight"
                                .into(),
                        ));
                    }
                    psi = StateVector::new(projected / C64::new(norm, 0.0))?;
                }
                *counts.entry(outcome).or_insert(0) += 1;
            }
            let frequencies = counts
                .into_iter()
                .map(|(k, v)| (k, v as f64 / trials as f64))
                .collect();
            Ok(OutcomeTable {
                state_index,
                frequencies,
                trials,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{random_effect, HermitianOperator};
    use crate::rng::master_stream;

    #[test]
    fn success_set_of_constant_experiment_is_empty() {
        let basis = Basis::standard(3).unwrap();
        let (est, _) =
            success_set_measure(&YesNoExperiment::always_no(3), &basis, 0.3, 2_000, 70, 0).unwrap();
        assert_eq!(est, 0.0);
        let (est, _) =
            success_set_measure(&YesNoExperiment::always_yes(3), &basis, 0.3, 2_000, 71, 0)
                .unwrap();
        assert_eq!(est, 0.0);
    }

    #[test]
    fn success_set_in_dimension_two_is_at_most_half() {
        let basis = Basis::standard(2).unwrap();
        let mut rng = master_stream(72);
        for p in [0.2, 0.5, 0.7] {
            for _ in 0..5 {
                let exp = YesNoExperiment::new(random_effect(2, &mut rng).unwrap());
                let (est, se) = success_set_measure(&exp, &basis, p, 10_000, 73, 0).unwrap();
                assert!(est <= 0.5 + 4.0 * se, "p={p}: estimate {est} stderr {se}");
            }
        }
    }

    #[test]
    fn success_set_at_small_prior_is_at_most_half() {
        // p = 0.1 < 1/2 - 1/sqrt(8)
        let mut rng = master_stream(74);
        for n in [2usize, 3, 4] {
            let basis = Basis::standard(n).unwrap();
            for _ in 0..4 {
                let exp = YesNoExperiment::new(random_effect(n, &mut rng).unwrap());
                let (est, se) = success_set_measure(&exp, &basis, 0.1, 10_000, 75, 0).unwrap();
                assert!(est <= 0.5 + 4.0 * se, "n={n}: estimate {est} stderr {se}");
            }
        }
    }

    #[test]
    fn scan_flags_and_ids() {
        let basis = Basis::standard(2).unwrap();
        let family = vec![
            ("zero".to_string(), Effect::zero(2)),
            ("identity".to_string(), Effect::identity(2)),
        ];
        let rows = scan_success_sets(&family, &basis, 0.4, 1_000, 76, 0).unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            assert_eq!(row.estimate, 0.0);
            assert!(!row.beats_half);
            assert!(!row.ceiling_violation);
        }
        assert!(scan_success_sets(&[], &basis, 0.4, 100, 0, 0).is_err());
    }

    #[test]
    fn ray_detectors_can_beat_half_at_moderate_prior() {
        // Exploratory: detectors of the form I - |phi⟩⟨phi| at n = 3,
        // p = 0.4 often help on a majority of states; report, no hard bound.
        let basis = Basis::standard(3).unwrap();
        let mut rng = master_stream(77);
        let mut best = 0.0f64;
        for _ in 0..10 {
            let phi = haar_state(3, &mut rng).unwrap();
            let exp = YesNoExperiment::leaves_ray_of(&phi);
            let (est, _) = success_set_measure(&exp, &basis, 0.4, 5_000, 78, 0).unwrap();
            best = best.max(est);
        }
        println!("max success-set estimate over ray detectors: {best}");
        assert!(best > 0.0);
    }

    #[test]
    fn repeated_measurement_on_invariant_state_is_constant_yes() {
        let b1 = StateVector::basis_state(2, 0).unwrap();
        let e = Effect::projector_onto(&b1);
        let tables = repeated_measurement_experiment(&[b1], &e, 5, 500, 79).unwrap();
        assert_eq!(tables[0].frequency("yyyyy"), 1.0);
    }

    #[test]
    fn second_lueders_outcome_repeats_the_first() {
        let psi = StateVector::uniform(2).unwrap();
        let family = vec![
            psi.clone(),
            StateVector::basis_state(2, 0).unwrap(),
            StateVector::basis_state(2, 1).unwrap(),
        ];
        let e = Effect::projector_onto(&psi).complement();
        let tables = repeated_measurement_experiment(&family, &e, 2, 2_000, 80).unwrap();
        for table in &tables {
            let repeat_mass = table.frequency("yy") + table.frequency("nn");
            assert!(
                (repeat_mass - 1.0).abs() < 1e-12,
                "state {}: mixed strings appeared: {:?}",
                table.state_index,
                table.frequencies
            );
        }
    }

    #[test]
    fn non_disturbing_effect_gives_identical_statistics() {
        // An effect acting as a scalar on the span of the family fixes every
        // member, and then the outcome distribution cannot depend on which
        // member was prepared.
        let psi = StateVector::uniform(2).unwrap();
        let family = vec![
            psi.clone(),
            StateVector::basis_state(2, 0).unwrap(),
            StateVector::basis_state(2, 1).unwrap(),
        ];
        let e = Effect::identity(2);
        let tables = repeated_measurement_experiment(&family, &e, 3, 1_000, 81).unwrap();
        for table in &tables {
            assert_eq!(table.frequency("yyy"), 1.0);
        }
    }

    #[test]
    fn non_projective_effect_is_rejected() {
        let e = Effect::new(HermitianOperator::from_real_diagonal(&[0.5, 0.5])).unwrap();
        let psi = StateVector::uniform(2).unwrap();
        assert!(matches!(
            repeated_measurement_experiment(&[psi], &e, 2, 10, 82),
            Err(Error::UnsupportedInstrument(_))
        ));
    }

    #[test]
    fn repeated_measurement_statistics_match_born_weights() {
        // First-outcome frequency for E = I - |psi⟩⟨psi| on a basis state is
        // 1/2; strings "y..." vs "n..." split accordingly.
        let psi = StateVector::uniform(2).unwrap();
        let e = Effect::projector_onto(&psi).complement();
        let b1 = StateVector::basis_state(2, 0).unwrap();
        let tables = repeated_measurement_experiment(&[b1], &e, 2, 100_000, 83).unwrap();
        let yes_first = tables[0].frequency("yy") + tables[0].frequency("yn");
        assert!(
            (yes_first - 0.5).abs() < 0.005,
            "yes-first frequency {yes_first}"
        );
    }
}
