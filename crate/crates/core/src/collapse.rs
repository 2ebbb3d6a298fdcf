//! One-shot collapse channel on a finite-dimensional space: with probability
//! p the state jumps to a basis vector with Born weights, otherwise it is
//! left untouched. Also the induced density-matrix pair and ensembles of
//! wave functions.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::quantum::{
    diag_part, haar_state, Basis, DensityMatrix, HermitianOperator, StateVector, C64, SUPPORT_EPS,
};

/// Random one-shot collapse onto a fixed orthonormal basis.
#[derive(Debug, Clone)]
pub struct CollapseChannel {
    basis: Basis,
    p: f64,
}

impl CollapseChannel {
    pub fn new(basis: Basis, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "collapse probability {p} not in [0,1]"
            )));
        }
        Ok(Self { basis, p })
    }

    /// Channel collapsing onto the standard basis.
    pub fn standard(n: usize, p: f64) -> Result<Self> {
        Self::new(Basis::standard(n)?, p)
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }
}

/// Result of one pass through the channel.
#[derive(Debug, Clone)]
pub struct CollapseOutcome {
    /// Post-channel state; equals the input exactly when no collapse fired.
    pub post_state: StateVector,
    /// Whether a collapse occurred.
    pub collapsed: bool,
    /// Basis index of the branch taken, when collapsed.
    pub branch: Option<usize>,
}

/// Applies the channel once.
///
/// With probability 1-p the input is returned unchanged. Otherwise branch k
/// is drawn with probability |⟨b_k|psi⟩|^2 and the state becomes
/// (⟨b_k|psi⟩/|⟨b_k|psi⟩|) b_k; branches of zero amplitude are never
/// selected and the phase factor keeps ⟨psi'|b_k⟩⟨b_k|psi⟩ real and
/// non-negative.
pub fn apply_collapse<R: Rng + ?Sized>(
    channel: &CollapseChannel,
    psi: &StateVector,
    rng: &mut R,
) -> Result<CollapseOutcome> {
    if psi.dim() != channel.dim() {
        return Err(Error::DimensionMismatch {
            expected: channel.dim(),
            actual: psi.dim(),
        });
    }
    if rng.random::<f64>() >= channel.p {
        return Ok(CollapseOutcome {
            post_state: psi.clone(),
            collapsed: false,
            branch: None,
        });
    }
    let components = channel.basis.components_of(psi)?;
    let weights: Vec<f64> = components.iter().map(|c| c.norm_sqr()).collect();
    let total: f64 = weights.iter().sum();
    // Cumulative draw over branches with nonzero amplitude.
    let u: f64 = rng.random::<f64>() * total;
    let mut cumulative = 0.0;
    let mut branch = None;
    for (k, &w) in weights.iter().enumerate() {
        if w <= SUPPORT_EPS {
            continue;
        }
        cumulative += w;
        if u < cumulative {
            branch = Some(k);
            break;
        }
    }
    let branch = branch.unwrap_or_else(|| {
        // Roundoff pushed u past the last bucket; take the last live branch.
        weights
            .iter()
            .rposition(|&w| w > SUPPORT_EPS)
            .expect("normalized state has a nonzero component")
    });
    let c = components[branch];
    let phase = c / C64::new(c.norm(), 0.0);
    let b = channel.basis.vector(branch)?;
    let post_state = StateVector::new(b.amplitudes() * phase)?;
    Ok(CollapseOutcome {
        post_state,
        collapsed: true,
        branch: Some(branch),
    })
}

/// The two hypotheses the collapse question discriminates:
/// rho1 = diag|psi⟩⟨psi| (collapsed) and rho2 = |psi⟩⟨psi| (intact).
pub fn rho_pair(psi: &StateVector, basis: &Basis) -> Result<(DensityMatrix, DensityMatrix)> {
    let projector = psi.projector();
    let rho1 = DensityMatrix::new(diag_part(&projector, basis)?)?;
    let rho2 = DensityMatrix::new(projector)?;
    Ok((rho1, rho2))
}

/// Exact ensemble average of |psi'⟩⟨psi'| under the channel:
/// p rho1 + (1-p) rho2.
pub fn post_collapse_density(
    channel: &CollapseChannel,
    psi: &StateVector,
) -> Result<DensityMatrix> {
    let (rho1, rho2) = rho_pair(psi, &channel.basis)?;
    let mixed = rho1
        .operator()
        .scale(channel.p)
        .add(&rho2.operator().scale(1.0 - channel.p))?;
    DensityMatrix::new(mixed)
}

/// Distribution over pure states: an explicit weighted list or the Haar
/// measure on the unit sphere.
#[derive(Debug, Clone)]
pub enum Ensemble {
    /// Finite mixture of (weight, state); weights must sum to 1.
    Finite(Vec<(f64, StateVector)>),
    /// Haar-uniform distribution in dimension `dim`.
    Haar { dim: usize },
}

impl Ensemble {
    /// Uniform mixture over the vectors of a basis.
    pub fn uniform_over_basis(basis: &Basis) -> Result<Self> {
        let n = basis.dim();
        let w = 1.0 / n as f64;
        let entries = (0..n)
            .map(|k| Ok((w, basis.vector(k)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Ensemble::Finite(entries))
    }

    /// Point mass on one state.
    pub fn point(psi: StateVector) -> Self {
        Ensemble::Finite(vec![(1.0, psi)])
    }

    pub fn dim(&self) -> Result<usize> {
        match self {
            Ensemble::Finite(entries) => entries
                .first()
                .map(|(_, s)| s.dim())
                .ok_or(Error::EmptyEnsemble),
            Ensemble::Haar { dim } => Ok(*dim),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Ensemble::Finite(entries) => {
                if entries.is_empty() {
                    return Err(Error::EmptyEnsemble);
                }
                let total: f64 = entries.iter().map(|(w, _)| w).sum();
                if entries.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "ensemble weights must be non-negative and sum to 1 (sum = {total})"
                    )));
                }
                let n = entries[0].1.dim();
                if entries.iter().any(|(_, s)| s.dim() != n) {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        actual: 0,
                    });
                }
                Ok(())
            }
            Ensemble::Haar { dim } => {
                if *dim == 0 {
                    return Err(Error::InvalidDimension(0));
                }
                Ok(())
            }
        }
    }
}

/// Density matrix of an ensemble, with the sample count used when the
/// ensemble required Monte Carlo averaging.
#[derive(Debug, Clone)]
pub struct EnsembleDensity {
    pub rho: DensityMatrix,
    /// Number of Haar samples averaged; `None` for the exact finite case.
    pub samples: Option<usize>,
}

/// rho_mu = E_mu |psi⟩⟨psi|: exact weighted sum for finite ensembles, Monte
/// Carlo average over `haar_samples` draws for the Haar case.
pub fn ensemble_density<R: Rng + ?Sized>(
    mu: &Ensemble,
    haar_samples: usize,
    rng: &mut R,
) -> Result<EnsembleDensity> {
    mu.validate()?;
    match mu {
        Ensemble::Finite(entries) => {
            let n = entries[0].1.dim();
            let mut acc = DMatrix::zeros(n, n);
            for (w, psi) in entries {
                acc += psi.projector().matrix().scale(*w);
            }
            Ok(EnsembleDensity {
                rho: DensityMatrix::new(HermitianOperator::new(acc)?)?,
                samples: None,
            })
        }
        Ensemble::Haar { dim } => {
            if haar_samples == 0 {
                return Err(Error::InvalidArgument(
                    "haar_samples must be positive".into(),
                ));
            }
            let mut acc = DMatrix::zeros(*dim, *dim);
            for _ in 0..haar_samples {
                let psi = haar_state(*dim, rng)?;
                acc += psi.projector().matrix();
            }
            acc /= C64::new(haar_samples as f64, 0.0);
            Ok(EnsembleDensity {
                rho: DensityMatrix::new(HermitianOperator::new(acc)?)?,
                samples: Some(haar_samples),
            })
        }
    }
}

/// Two distinct ensembles with the same density matrix I/n: uniform over the
/// standard basis and uniform over the discrete-Fourier basis. No experiment
/// can tell them apart, since outcome statistics depend on mu only through
/// rho_mu.
pub fn twin_ensembles(n: usize) -> Result<(Ensemble, Ensemble)> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    let mu1 = Ensemble::uniform_over_basis(&Basis::standard(n)?)?;
    let mu2 = Ensemble::uniform_over_basis(&Basis::fourier(n)?)?;
    Ok((mu1, mu2))
}
