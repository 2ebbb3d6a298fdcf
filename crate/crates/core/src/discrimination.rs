//! Retrodicting the collapse: reliability functionals for yes/no
//! experiments, blind guessing, Helstrom-optimal discrimination of the
//! collapsed/intact hypothesis pair, the closed-form optimal detector,
//! Bayesian posteriors, and uniform-prior averages.
//!
//! Conventions: the yes-effect E answers "a collapse occurred"; the collapse
//! prior is P(C=1) = p; the reliability of an experiment is the probability
//! that its answer matches C. Analytically everything reduces to the
//! retrodiction operator A = p diag(E) + (1-p)(I - E): the reliability is
//! ⟨psi|A|psi⟩ for a known pre-collapse state and tr(rho A) for a random one.

mod montecarlo;
mod success_set;

pub use montecarlo::{mc_reliability, reliability_report, ReliabilityReport};
pub use success_set::{
    repeated_measurement_experiment, scan_success_sets, success_set_measure, OutcomeTable, ScanRow,
    SUCCESS_MARGIN,
};

use nalgebra::DMatrix;

use crate::collapse::rho_pair;
use crate::error::{Error, Result};
use crate::quantum::{
    diag_part, positive_part_projector, Basis, CVector, DensityMatrix, Effect, HermitianOperator,
    Povm, QuantumState, StateVector, C64, SUPPORT_EPS,
};

/// Branch-point snapping width: within this of p = n/(n+1) the
/// identity-effect branch is taken (both branches give reliability p there).
pub const BRANCH_POINT_TOL: f64 = 1e-12;

/// Yes/no experiment characterized by its yes-effect; "yes" asserts that a
/// collapse occurred.
#[derive(Debug, Clone)]
pub struct YesNoExperiment {
    effect_yes: Effect,
}

impl YesNoExperiment {
    pub fn new(effect_yes: Effect) -> Self {
        Self { effect_yes }
    }

    /// The experiment that never interacts and always answers "no" (E = 0).
    pub fn always_no(n: usize) -> Self {
        Self {
            effect_yes: Effect::zero(n),
        }
    }

    /// The experiment that always answers "yes" (E = I).
    pub fn always_yes(n: usize) -> Self {
        Self {
            effect_yes: Effect::identity(n),
        }
    }

    /// Projective detector E = I - |psi⟩⟨psi|: "yes" iff the state left the
    /// ray of psi.
    pub fn leaves_ray_of(psi: &StateVector) -> Self {
        Self {
            effect_yes: Effect::projector_onto(psi).complement(),
        }
    }

    pub fn effect_yes(&self) -> &Effect {
        &self.effect_yes
    }

    pub fn effect_no(&self) -> Effect {
        self.effect_yes.complement()
    }

    pub fn povm(&self) -> Povm {
        Povm::yes_no(self.effect_yes.clone())
    }

    pub fn dim(&self) -> usize {
        self.effect_yes.dim()
    }
}

/// Optimal yes/no detector for a known pre-collapse state.
#[derive(Debug, Clone)]
pub struct OptimalDetector {
    pub effect: Effect,
    /// Lagrange parameter z of the detector profile; `None` on the
    /// identity-effect branch.
    pub z_value: Option<f64>,
    pub reliability: f64,
}

fn check_prior(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("prior {p} not in [0,1]")));
    }
    Ok(())
}

/// Retrodiction operator A = p diag(E) + (1-p)(I - E) in the collapse basis.
pub fn retrodiction_operator(
    exp: &YesNoExperiment,
    basis: &Basis,
    p: f64,
) -> Result<HermitianOperator> {
    check_prior(p)?;
    let e = exp.effect_yes().operator();
    let diag_e = diag_part(e, basis)?;
    diag_e
        .scale(p)
        .add(&HermitianOperator::identity(e.dim()).sub(e)?.scale(1.0 - p))
}

/// Reliability ⟨psi|A|psi⟩ of a yes/no experiment on a known pre-collapse
/// state: the probability that its answer matches whether a collapse
/// occurred.
pub fn reliability_pure(
    psi: &StateVector,
    exp: &YesNoExperiment,
    basis: &Basis,
    p: f64,
) -> Result<f64> {
    retrodiction_operator(exp, basis, p)?.expectation(psi)
}

/// Reliability tr(rho A) when the pre-collapse state is random with density
/// matrix rho.
pub fn reliability_mixed(
    rho: &DensityMatrix,
    exp: &YesNoExperiment,
    basis: &Basis,
    p: f64,
) -> Result<f64> {
    retrodiction_operator(exp, basis, p)?.trace_product(rho.operator())
}

/// Reliability of guessing between two density-matrix hypotheses with prior
/// P(X=1) = p: p tr(E rho1) + (1-p) tr((I-E) rho2).
pub fn reliability_two_hypothesis(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    effect: &Effect,
    p: f64,
) -> Result<f64> {
    check_prior(p)?;
    let yes_given_1 = rho1.operator().trace_product(effect.operator())?;
    let yes_given_2 = rho2.operator().trace_product(effect.operator())?;
    Ok(p * yes_given_1 + (1.0 - p) * (1.0 - yes_given_2))
}

/// The no-interaction experiment answering the a-priori likelier
/// alternative. Returns its effect and reliability max{p, 1-p}; the tie at
/// p = 1/2 resolves to the all-no experiment.
pub fn blind_guess(n: usize, p: f64) -> Result<(Effect, f64)> {
    check_prior(p)?;
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if p <= 0.5 {
        Ok((Effect::zero(n), 1.0 - p))
    } else {
        Ok((Effect::identity(n), p))
    }
}

/// Minimum-error discrimination of rho1 (prior p) vs rho2 (prior 1-p):
/// the spectral projector onto the positive part of p rho1 - (1-p) rho2,
/// and the maximal reliability 1 - p + (positive eigenvalue sum).
pub fn helstrom(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    p: f64,
    tol: Option<f64>,
) -> Result<(Effect, f64)> {
    check_prior(p)?;
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho1.dim(),
            actual: rho2.dim(),
        });
    }
    let a = rho1
        .operator()
        .scale(p)
        .sub(&rho2.operator().scale(1.0 - p))?;
    let (p_plus, _p_zero, positive_sum) = positive_part_projector(&a, tol)?;
    Ok((p_plus, 1.0 - p + positive_sum))
}

/// Detector profile f_psi(z) = sum_k |psi_k|^2 / (z + |psi_k|^2) over the
/// nonzero amplitudes; strictly decreasing from the support count at z = 0
/// towards 0.
pub fn f_psi(psi: &StateVector, z: f64) -> Result<f64> {
    if z < 0.0 || !z.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "z = {z} must be non-negative"
        )));
    }
    Ok(psi
        .amplitudes()
        .iter()
        .map(|a| a.norm_sqr())
        .filter(|&w| w > SUPPORT_EPS)
        .map(|w| w / (z + w))
        .sum())
}

/// Number of amplitudes carrying weight, i.e. f_psi(0).
pub fn support_count(psi: &StateVector) -> usize {
    psi.amplitudes()
        .iter()
        .filter(|a| a.norm_sqr() > SUPPORT_EPS)
        .count()
}

/// Inverse of the detector profile by bisection: the z >= 0 with
/// f_psi(z) = ratio, within `tol` (default 1e-12) in function value.
///
/// Errors with [`Error::OutOfBranch`] when ratio exceeds f_psi(0); the
/// caller must then use the identity-effect branch.
pub fn invert_f_psi(psi: &StateVector, ratio: f64, tol: Option<f64>) -> Result<f64> {
    if ratio <= 0.0 || !ratio.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "ratio {ratio} must be positive"
        )));
    }
    let tol = tol.unwrap_or(1e-12);
    let f0 = f_psi(psi, 0.0)?;
    if ratio > f0 {
        if ratio <= f0 * (1.0 + 1e-15) {
            return Ok(0.0);
        }
        return Err(Error::OutOfBranch { ratio, max: f0 });
    }
    if ratio == f0 {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while f_psi(psi, hi)? >= ratio {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Numerical("bisection bracket diverged".into()));
        }
    }
    let mut lo = 0.0;
    // Bisect to machine resolution; the f-value tolerance is then met with
    // plenty of slack for any well-scaled ratio.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f_psi(psi, mid)? >= ratio {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = 0.5 * (lo + hi);
    let achieved = f_psi(psi, z)?;
    if (achieved - ratio).abs() > tol {
        return Err(Error::Numerical(format!(
            "bisection stalled: |f(z) - ratio| = {:.3e} > {tol:.3e}",
            (achieved - ratio).abs()
        )));
    }
    Ok(z)
}

/// Closed-form optimal collapse detector for a known pre-collapse state.
///
/// Below the branch point p = n/(n+1) (n = support count) the optimum is
/// E = I - |psi~⟩⟨psi~| with psi~ proportional to M^{-1} psi,
/// M = z I + diag|psi⟩⟨psi|, z = f_psi^{-1}(p/(1-p)), and the reliability is
/// p(1+z); at or above the branch point the optimum is E = I with
/// reliability p.
pub fn optimal_collapse_detector(
    psi: &StateVector,
    basis: &Basis,
    p: f64,
) -> Result<OptimalDetector> {
    check_prior(p)?;
    if p == 0.0 || p == 1.0 {
        return Err(Error::DegeneratePrior(p));
    }
    let components = basis.components_of(psi)?;
    let psi_b = StateVector::new(components.clone())?;
    let n_eff = support_count(&psi_b);
    let branch_point = n_eff as f64 / (n_eff as f64 + 1.0);
    if p >= branch_point - BRANCH_POINT_TOL {
        return Ok(OptimalDetector {
            effect: Effect::identity(psi.dim()),
            z_value: None,
            reliability: p,
        });
    }
    let ratio = p / (1.0 - p);
    let z = invert_f_psi(&psi_b, ratio, None)?;
    // psi~ = M^{-1} psi / ||M^{-1} psi|| with M = z I + diag|psi⟩⟨psi|:
    // componentwise psi_k / (z + |psi_k|^2) on the support.
    let tilde = CVector::from_iterator(
        components.len(),
        components.iter().map(|&c| {
            let w = c.norm_sqr();
            if w > SUPPORT_EPS {
                c / C64::new(z + w, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }),
    );
    let tilde = StateVector::new(tilde)?;
    let n = psi.dim();
    let effect_in_basis = DMatrix::identity(n, n) - tilde.projector().matrix();
    let effect = Effect::new(HermitianOperator::new(
        basis.operator_from_components(&effect_in_basis),
    )?)?;
    Ok(OptimalDetector {
        effect,
        z_value: Some(z),
        reliability: p * (1.0 + z),
    })
}

/// Upper bound on the reliability of any experiment on any state of an
/// n-dimensional space: 1 - p/n up to the branch point p = n/(n+1), then p.
pub fn reliability_bound(n: usize, p: f64) -> Result<f64> {
    check_prior(p)?;
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let branch_point = n as f64 / (n as f64 + 1.0);
    Ok(if p <= branch_point {
        1.0 - p / n as f64
    } else {
        p
    })
}

/// Helstrom reliability of the collapse pair of psi, i.e. the spectral-route
/// optimum that the closed form must reproduce.
pub fn optimal_reliability_spectral(psi: &StateVector, basis: &Basis, p: f64) -> Result<f64> {
    let (rho1, rho2) = rho_pair(psi, basis)?;
    Ok(helstrom(&rho1, &rho2, p, None)?.1)
}

/// Posterior probability P(C=1 | Z=outcome) after measuring a POVM on the
/// post-collapse state.
///
/// The likelihoods are P(Z=z|C=1) = tr(rho diag E_z) and
/// P(Z=z|C=0) = tr(rho E_z), with rho the (pure or mixed) pre-collapse
/// preparation.
pub fn bayes_posterior(
    state: &QuantumState,
    povm: &Povm,
    basis: &Basis,
    p: f64,
    outcome: &str,
) -> Result<f64> {
    check_prior(p)?;
    let effect = povm
        .effect_for(outcome)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown outcome label {outcome:?}")))?;
    let rho = state.to_density();
    let diag_e = diag_part(effect.operator(), basis)?;
    let yes_given_collapse = rho.operator().trace_product(&diag_e)?.clamp(0.0, 1.0);
    let yes_given_intact = rho
        .operator()
        .trace_product(effect.operator())?
        .clamp(0.0, 1.0);
    let joint_collapsed = p * yes_given_collapse;
    let joint_intact = (1.0 - p) * yes_given_intact;
    let denom = joint_collapsed + joint_intact;
    if denom <= 1e-30 {
        return Err(Error::ZeroProbabilityOutcome(outcome.to_string()));
    }
    Ok(joint_collapsed / denom)
}

/// Reliability averaged over a Haar-uniform pre-collapse state:
/// 1 - p - (1-2p) tr(E)/n.
pub fn haar_average_reliability(exp: &YesNoExperiment, n: usize, p: f64) -> Result<f64> {
    check_prior(p)?;
    if exp.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: exp.dim(),
        });
    }
    let tr_e = exp.effect_yes().operator().trace();
    Ok(1.0 - p - (1.0 - 2.0 * p) * tr_e / n as f64)
}
