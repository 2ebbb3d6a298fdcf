//! Finite-dimensional complex linear algebra substrate: states, Hermitian
//! operators, effects, POVMs, Haar sampling, spectral decomposition, and Born
//! probabilities.
//!
//! Dimensions are small (typically n <= 16); everything is dense
//! `nalgebra` arithmetic over `Complex<f64>`.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Unit-norm tolerance enforced by state constructors.
pub const NORM_TOL: f64 = 1e-12;
/// Entrywise self-adjointness tolerance.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Validation slack on effect eigenvalues outside [0, 1].
pub const EFFECT_SLACK: f64 = 1e-10;
/// Density-matrix eigenvalue / trace tolerance.
pub const DENSITY_TOL: f64 = 1e-10;
/// POVM completeness tolerance (entrywise).
pub const POVM_TOL: f64 = 1e-10;
/// Basis orthonormality tolerance.
pub const BASIS_TOL: f64 = 1e-10;
/// Outcome probabilities must sum to 1 within this before sampling.
pub const PROB_SUM_TOL: f64 = 1e-8;
/// Amplitudes with |psi_k|^2 below this count as zero support.
pub const SUPPORT_EPS: f64 = 1e-24;

fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Unit-norm complex amplitude vector over a finite basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: CVector,
}

impl StateVector {
    /// Normalizes `amps` to unit norm. Errors on an empty or zero vector.
    pub fn new(amps: CVector) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        let norm = amps.norm();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            amps: amps / C64::new(norm, 0.0),
        })
    }

    pub fn from_reals(reals: &[f64]) -> Result<Self> {
        Self::new(CVector::from_iterator(
            reals.len(),
            reals.iter().map(|&r| C64::new(r, 0.0)),
        ))
    }

    /// k-th computational basis vector of dimension n.
    pub fn basis_state(n: usize, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if k >= n {
            return Err(Error::InvalidArgument(format!(
                "basis index {k} out of 0..{n}"
            )));
        }
        let mut amps = CVector::zeros(n);
        amps[k] = C64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    /// Equal-weight superposition of all n basis vectors.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        let a = 1.0 / (n as f64).sqrt();
        Ok(Self {
            amps: CVector::from_element(n, C64::new(a, 0.0)),
        })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// Inner product ⟨self|other⟩ (conjugate-linear in self).
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// Rank-one projector |psi⟩⟨psi|.
    pub fn projector(&self) -> HermitianOperator {
        let m = &self.amps * self.amps.adjoint();
        HermitianOperator { m }
    }

    /// Squared overlap |⟨self|other⟩|^2.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }
}

/// Self-adjoint matrix. The constructor checks A = A^dag entrywise and stores
/// the symmetrized average to stop drift from compounding.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    m: CMatrix,
}

impl HermitianOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::InvalidDimension(m.nrows()));
        }
        let deviation = max_abs_entry(&(&m - m.adjoint()));
        if deviation > HERMITICITY_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let sym = (&m + m.adjoint()).scale(0.5);
        Ok(Self { m: sym })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: CMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            m: CMatrix::zeros(n, n),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let v = CVector::from_iterator(diag.len(), diag.iter().map(|&d| C64::new(d, 0.0)));
        Self {
            m: CMatrix::from_diagonal(&v),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// ⟨psi|A|psi⟩ (real by self-adjointness).
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: psi.dim(),
            });
        }
        Ok(psi.amplitudes().dotc(&(&self.m * psi.amplitudes())).re)
    }

    /// tr(self * other), real for a pair of Hermitian operators.
    pub fn trace_product(&self, other: &Self) -> Result<f64> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        // tr(AB) = sum_{ij} A_ij B_ji
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += self.m[(i, j)] * other.m[(j, i)];
            }
        }
        Ok(acc.re)
    }

    /// Spectral decomposition: real eigenvalues and unitary eigenvector
    /// columns, eigenvalues ascending.
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        let se = self.m.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
        let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
        let vecs = CMatrix::from_columns(
            &order
                .iter()
                .map(|&i| se.eigenvectors.column(i).into_owned())
                .collect::<Vec<_>>(),
        );
        (vals, vecs)
    }

    /// Largest |eigenvalue|.
    pub fn operator_norm(&self) -> f64 {
        let (vals, _) = self.eigen();
        vals.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(Self {
            m: &self.m + &other.m,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(Self {
            m: &self.m - &other.m,
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            m: self.m.scale(factor),
        }
    }
}

/// POVM element: a Hermitian operator with 0 <= E <= I.
///
/// Construction validates eigenvalues within [`EFFECT_SLACK`] and spectrally
/// clamps any that drift outside [0, 1], so chained `I - E` expressions stay
/// valid effects.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    op: HermitianOperator,
}

impl Effect {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let (vals, vecs) = op.eigen();
        let min_eig = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_eig = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if min_eig < -EFFECT_SLACK || max_eig > 1.0 + EFFECT_SLACK {
            return Err(Error::EffectOutOfRange { min_eig, max_eig });
        }
        if min_eig < 0.0 || max_eig > 1.0 {
            // Rebuild with eigenvalues clamped into [0, 1].
            let clamped = CVector::from_iterator(
                vals.len(),
                vals.iter().map(|&v| C64::new(v.clamp(0.0, 1.0), 0.0)),
            );
            let m = &vecs * CMatrix::from_diagonal(&clamped) * vecs.adjoint();
            return Ok(Self {
                op: HermitianOperator::new(m)?,
            });
        }
        Ok(Self { op })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            op: HermitianOperator::identity(n),
        }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            op: HermitianOperator::zeros(n),
        }
    }

    /// Rank-one projector onto a state.
    pub fn projector_onto(psi: &StateVector) -> Self {
        Self {
            op: psi.projector(),
        }
    }

    /// I - E.
    pub fn complement(&self) -> Self {
        let n = self.dim();
        let m = CMatrix::identity(n, n) - self.op.matrix();
        Self {
            op: HermitianOperator { m },
        }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    /// Whether E^2 = E within `tol`.
    pub fn is_projector(&self, tol: f64) -> bool {
        let m = self.op.matrix();
        max_abs_entry(&(m * m - m)) <= tol
    }
}

/// Positive unit-trace Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let (vals, _) = op.eigen();
        let min_eig = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -DENSITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        let trace = op.trace();
        if (trace - 1.0).abs() > DENSITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {trace} != 1")));
        }
        Ok(Self { op })
    }

    pub fn pure(psi: &StateVector) -> Self {
        Self {
            op: psi.projector(),
        }
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        Ok(Self {
            op: HermitianOperator::identity(n).scale(1.0 / n as f64),
        })
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }
}

/// Pure or mixed preparation, accepted wherever Born probabilities apply.
#[derive(Debug, Clone)]
pub enum QuantumState {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl QuantumState {
    pub fn dim(&self) -> usize {
        match self {
            QuantumState::Pure(psi) => psi.dim(),
            QuantumState::Mixed(rho) => rho.dim(),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            QuantumState::Pure(psi) => DensityMatrix::pure(psi),
            QuantumState::Mixed(rho) => rho.clone(),
        }
    }
}

impl From<StateVector> for QuantumState {
    fn from(psi: StateVector) -> Self {
        QuantumState::Pure(psi)
    }
}

impl From<DensityMatrix> for QuantumState {
    fn from(rho: DensityMatrix) -> Self {
        QuantumState::Mixed(rho)
    }
}

impl From<&StateVector> for QuantumState {
    fn from(psi: &StateVector) -> Self {
        QuantumState::Pure(psi.clone())
    }
}

impl From<&DensityMatrix> for QuantumState {
    fn from(rho: &DensityMatrix) -> Self {
        QuantumState::Mixed(rho.clone())
    }
}

/// Labeled family of effects summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    effects: Vec<(String, Effect)>,
}

impl Povm {
    pub fn new(effects: Vec<(String, Effect)>) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::IncompletePovm { deviation: 1.0 });
        }
        let n = effects[0].1.dim();
        let mut sum = CMatrix::zeros(n, n);
        for (_, e) in &effects {
            if e.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: e.dim(),
                });
            }
            sum += e.operator().matrix();
        }
        let deviation = max_abs_entry(&(sum - CMatrix::identity(n, n)));
        if deviation > POVM_TOL {
            return Err(Error::IncompletePovm { deviation });
        }
        Ok(Self { effects })
    }

    /// Two-outcome POVM {yes: E, no: I - E}.
    pub fn yes_no(effect_yes: Effect) -> Self {
        let effect_no = effect_yes.complement();
        Self {
            effects: vec![("yes".into(), effect_yes), ("no".into(), effect_no)],
        }
    }

    pub fn dim(&self) -> usize {
        self.effects[0].1.dim()
    }

    pub fn effects(&self) -> &[(String, Effect)] {
        &self.effects
    }

    pub fn effect_for(&self, label: &str) -> Option<&Effect> {
        self.effects
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, e)| e)
    }
}

/// Orthonormal basis of the n-dimensional space; `Standard` avoids carrying a
/// unitary for the common computational-basis case.
#[derive(Debug, Clone)]
pub struct Basis {
    n: usize,
    /// Columns are the basis vectors; `None` means the standard basis.
    u: Option<CMatrix>,
}

impl Basis {
    pub fn standard(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        Ok(Self { n, u: None })
    }

    /// Basis from unitary columns, validated orthonormal within [`BASIS_TOL`].
    pub fn from_columns(u: CMatrix) -> Result<Self> {
        let n = u.nrows();
        if n == 0 || u.ncols() != n {
            return Err(Error::InvalidDimension(n));
        }
        let deviation = max_abs_entry(&(u.adjoint() * &u - CMatrix::identity(n, n)));
        if deviation > BASIS_TOL {
            return Err(Error::NonOrthonormalBasis { deviation });
        }
        Ok(Self { n, u: Some(u) })
    }

    /// Discrete-Fourier basis f_j = n^{-1/2} sum_k e^{2 pi i jk / n} b_k.
    pub fn fourier(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        let scale = 1.0 / (n as f64).sqrt();
        let u = CMatrix::from_fn(n, n, |k, j| {
            let phase = 2.0 * std::f64::consts::PI * (j as f64) * (k as f64) / (n as f64);
            C64::new(phase.cos(), phase.sin()).scale(scale)
        });
        Self::from_columns(u)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_standard(&self) -> bool {
        self.u.is_none()
    }

    /// k-th basis vector.
    pub fn vector(&self, k: usize) -> Result<StateVector> {
        if k >= self.n {
            return Err(Error::InvalidArgument(format!(
                "basis index {k} out of 0..{}",
                self.n
            )));
        }
        match &self.u {
            None => StateVector::basis_state(self.n, k),
            Some(u) => StateVector::new(u.column(k).into_owned()),
        }
    }

    /// Coordinates of psi in this basis: c_k = ⟨b_k|psi⟩.
    pub fn components_of(&self, psi: &StateVector) -> Result<CVector> {
        if psi.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: psi.dim(),
            });
        }
        Ok(match &self.u {
            None => psi.amplitudes().clone(),
            Some(u) => u.adjoint() * psi.amplitudes(),
        })
    }

    /// Rotate an operator expressed in this basis back to standard
    /// coordinates: U A U^dag.
    pub fn operator_from_components(&self, a: &CMatrix) -> CMatrix {
        match &self.u {
            None => a.clone(),
            Some(u) => u * a * u.adjoint(),
        }
    }
}

/// Haar-uniform pure state: n independent standard complex Gaussians,
/// normalized.
pub fn haar_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<StateVector> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let amps = CVector::from_iterator(
        n,
        (0..n).map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        }),
    );
    StateVector::new(amps)
}

/// Haar-uniform unitary via QR of a complex Ginibre matrix with the R
/// diagonal phase-fixed.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let g = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

/// Random effect E = U diag(u_1..u_n) U^dag with Haar U and iid uniform
/// eigenvalues in [0, 1]; covers the interior of the effect polytope.
pub fn random_effect<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Effect> {
    let u = haar_unitary(n, rng)?;
    let diag = CVector::from_iterator(n, (0..n).map(|_| C64::new(rng.random::<f64>(), 0.0)));
    let m = &u * CMatrix::from_diagonal(&diag) * u.adjoint();
    Effect::new(HermitianOperator::new(m)?)
}

/// Random POVM with `outcomes` labeled elements: random effects symmetrized
/// into completeness by S^{-1/2} E_k S^{-1/2} with S their sum.
pub fn random_povm<R: Rng + ?Sized>(n: usize, outcomes: usize, rng: &mut R) -> Result<Povm> {
    if outcomes == 0 {
        return Err(Error::InvalidArgument("need at least one outcome".into()));
    }
    let raw: Vec<HermitianOperator> = (0..outcomes)
        .map(|_| Ok(random_effect(n, rng)?.operator().clone()))
        .collect::<Result<_>>()?;
    let mut sum = CMatrix::zeros(n, n);
    for e in &raw {
        sum += e.matrix();
    }
    let (vals, vecs) = HermitianOperator::new(sum)?.eigen();
    if vals.iter().any(|&v| v <= 1e-12) {
        // Singular sum (vanishingly unlikely); retry with fresh effects.
        return random_povm(n, outcomes, rng);
    }
    let inv_sqrt = CVector::from_iterator(n, vals.iter().map(|&v| C64::new(1.0 / v.sqrt(), 0.0)));
    let s_inv_sqrt = &vecs * CMatrix::from_diagonal(&inv_sqrt) * vecs.adjoint();
    let effects = raw
        .into_iter()
        .enumerate()
        .map(|(k, e)| {
            let m = &s_inv_sqrt * e.matrix() * &s_inv_sqrt;
            Ok((format!("z{k}"), Effect::new(HermitianOperator::new(m)?)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Povm::new(effects)
}

/// Random effect of fixed rank: a Haar-rotated projector onto `rank`
/// basis directions.
pub fn random_rank_projector<R: Rng + ?Sized>(
    n: usize,
    rank: usize,
    rng: &mut R,
) -> Result<Effect> {
    if rank > n {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} exceeds dimension {n}"
        )));
    }
    let u = haar_unitary(n, rng)?;
    let diag = CVector::from_iterator(
        n,
        (0..n).map(|k| C64::new(if k < rank { 1.0 } else { 0.0 }, 0.0)),
    );
    let m = &u * CMatrix::from_diagonal(&diag) * u.adjoint();
    Effect::new(HermitianOperator::new(m)?)
}

/// Born probability ⟨psi|E|psi⟩ or tr(rho E), clamped to [0, 1].
pub fn born_probability(state: &QuantumState, effect: &Effect) -> Result<f64> {
    if state.dim() != effect.dim() {
        return Err(Error::DimensionMismatch {
            expected: effect.dim(),
            actual: state.dim(),
        });
    }
    let raw = match state {
        QuantumState::Pure(psi) => effect.operator().expectation(psi)?,
        QuantumState::Mixed(rho) => rho.operator().trace_product(effect.operator())?,
    };
    Ok(raw.clamp(0.0, 1.0))
}

/// Draws an outcome label with Born probabilities by the cumulative method
/// over the POVM's fixed label order.
pub fn sample_outcome<R: Rng + ?Sized>(
    state: &QuantumState,
    povm: &Povm,
    rng: &mut R,
) -> Result<String> {
    if state.dim() != povm.dim() {
        return Err(Error::DimensionMismatch {
            expected: povm.dim(),
            actual: state.dim(),
        });
    }
    let probs: Vec<f64> = povm
        .effects()
        .iter()
        .map(|(_, e)| born_probability(state, e))
        .collect::<Result<_>>()?;
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::InternalConsistency(format!(
            "outcome probabilities sum to {total}, not 1"
        )));
    }
    let u: f64 = rng.random::<f64>() * total;
    let mut cumulative = 0.0;
    for ((label, _), p) in povm.effects().iter().zip(&probs) {
        cumulative += p;
        if u < cumulative {
            return Ok(label.clone());
        }
    }
    Ok(povm.effects().last().expect("POVM is non-empty").0.clone())
}

/// Diagonal part of A in the given basis: sum_k |b_k⟩⟨b_k| A |b_k⟩⟨b_k|.
pub fn diag_part(a: &HermitianOperator, basis: &Basis) -> Result<HermitianOperator> {
    if a.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            actual: a.dim(),
        });
    }
    let keep_diagonal = |m: &CMatrix| {
        let n = m.nrows();
        CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                m[(i, i)]
            } else {
                C64::new(0.0, 0.0)
            }
        })
    };
    let m = match basis.is_standard() {
        true => keep_diagonal(a.matrix()),
        false => {
            let u = basis
                .components_matrix()
                .expect("non-standard basis carries a unitary");
            let in_basis = u.adjoint() * a.matrix() * u;
            basis.operator_from_components(&keep_diagonal(&in_basis))
        }
    };
    HermitianOperator::new(m)
}

/// Spectral split of a Hermitian operator at an eigenvalue threshold.
///
/// Returns the projector onto eigenvalues `> tol`, the projector onto
/// eigenvalues with `|lambda| <= tol`, and the sum of eigenvalues `> tol`
/// with multiplicity. Default threshold is `1e-10 * max(1, ||A||_op)`.
pub fn positive_part_projector(
    a: &HermitianOperator,
    tol: Option<f64>,
) -> Result<(Effect, Effect, f64)> {
    let (vals, vecs) = a.eigen();
    let op_norm = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let tol = tol.unwrap_or(1e-10 * op_norm.max(1.0));
    let n = a.dim();
    let mut p_plus = CMatrix::zeros(n, n);
    let mut p_zero = CMatrix::zeros(n, n);
    let mut positive_sum = 0.0;
    for (k, &val) in vals.iter().enumerate() {
        let v = vecs.column(k);
        if val > tol {
            p_plus += v * v.adjoint();
            positive_sum += val;
        } else if val.abs() <= tol {
            p_zero += v * v.adjoint();
        }
    }
    let p_plus = Effect::new(HermitianOperator::new(p_plus)?)?;
    let p_zero = Effect::new(HermitianOperator::new(p_zero)?)?;
    Ok((p_plus, p_zero, positive_sum))
}

impl Basis {
    /// The unitary of basis columns, if not the standard basis.
    pub fn components_matrix(&self) -> Option<&CMatrix> {
        self.u.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::master_stream;

    fn max_dev(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn haar_state_dimension_one_has_unit_modulus() {
        let mut rng = master_stream(20);
        for _ in 0..100 {
            let psi = haar_state(1, &mut rng).unwrap();
            assert!((psi.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn haar_state_rejects_dimension_zero() {
        let mut rng = master_stream(21);
        assert!(matches!(
            haar_state(0, &mut rng),
            Err(Error::InvalidDimension(0))
        ));
    }

    #[test]
    fn haar_state_is_normalized() {
        let mut rng = master_stream(22);
        for n in [1usize, 2, 5, 16] {
            for _ in 0..20 {
                let psi = haar_state(n, &mut rng).unwrap();
                assert!((psi.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn haar_second_moment_is_maximally_mixed() {
        // Mean of |psi⟩⟨psi| over 1e5 draws within 0.01 entrywise of I/4,
        // and within 4 empirical standard errors.
        let n = 4;
        let samples = 100_000u32;
        let mut rng = master_stream(23);
        let mut sum = CMatrix::zeros(n, n);
        let mut sum_sq = DMatrix::<f64>::zeros(n, n);
        for _ in 0..samples {
            let psi = haar_state(n, &mut rng).unwrap();
            let proj = psi.projector();
            for i in 0..n {
                for j in 0..n {
                    let z = proj.matrix()[(i, j)];
                    sum[(i, j)] += z;
                    sum_sq[(i, j)] += z.norm_sqr();
                }
            }
        }
        let target = CMatrix::identity(n, n).scale(1.0 / n as f64);
        for i in 0..n {
            for j in 0..n {
                let mean = sum[(i, j)] / C64::new(samples as f64, 0.0);
                let dev = (mean - target[(i, j)]).norm();
                assert!(dev < 0.01, "entry ({i},{j}) deviates by {dev}");
                let var = (sum_sq[(i, j)] / samples as f64 - mean.norm_sqr()).max(0.0);
                let stderr = (var / samples as f64).sqrt();
                assert!(
                    dev <= 4.0 * stderr + 1e-12,
                    "entry ({i},{j}): {dev} > 4x{stderr}"
                );
            }
        }
    }

    #[test]
    fn born_probability_completeness_and_orthogonality() {
        let mut rng = master_stream(24);
        let psi = haar_state(3, &mut rng).unwrap();
        let identity = Effect::identity(3);
        let p = born_probability(&QuantumState::from(&psi), &identity).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        let complement = Effect::projector_onto(&psi).complement();
        let q = born_probability(&QuantumState::from(&psi), &complement).unwrap();
        assert!(q.abs() < 1e-12);
    }

    #[test]
    fn born_probability_mixed_state() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        let e = Effect::new(HermitianOperator::from_real_diagonal(&[1.0, 0.0])).unwrap();
        let p = born_probability(&QuantumState::from(&rho), &e).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn born_probability_dimension_mismatch() {
        let psi = StateVector::basis_state(2, 0).unwrap();
        let e = Effect::identity(3);
        assert!(matches!(
            born_probability(&QuantumState::from(&psi), &e),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sample_outcome_single_effect_povm() {
        let povm = Povm::new(vec![("only".into(), Effect::identity(2))]).unwrap();
        let mut rng = master_stream(25);
        let psi = haar_state(2, &mut rng).unwrap();
        for _ in 0..50 {
            assert_eq!(
                sample_outcome(&QuantumState::from(&psi), &povm, &mut rng).unwrap(),
                "only"
            );
        }
    }

    #[test]
    fn sample_outcome_projective_on_basis_state_is_deterministic() {
        let e0 = Effect::projector_onto(&StateVector::basis_state(2, 0).unwrap());
        let povm = Povm::yes_no(e0);
        let psi = StateVector::basis_state(2, 0).unwrap();
        let mut rng = master_stream(26);
        for _ in 0..200 {
            assert_eq!(
                sample_outcome(&QuantumState::from(&psi), &povm, &mut rng).unwrap(),
                "yes"
            );
        }
    }

    #[test]
    fn sample_outcome_equal_superposition_frequency() {
        // Label frequency 0.5 +/- 0.005 over 1e5 draws.
        let e0 = Effect::projector_onto(&StateVector::basis_state(2, 0).unwrap());
        let povm = Povm::yes_no(e0);
        let psi = StateVector::uniform(2).unwrap();
        let state = QuantumState::from(&psi);
        let draws = 100_000;
        let mut hits = 0u64;
        for t in 0..draws {
            let mut rng = crate::rng::trial_stream(27, t);
            if sample_outcome(&state, &povm, &mut rng).unwrap() == "yes" {
                hits += 1;
            }
        }
        let freq = hits as f64 / draws as f64;
        assert!((freq - 0.5).abs() < 0.005, "frequency {freq}");
    }

    #[test]
    fn povm_probabilities_sum_to_one() {
        let mut rng = master_stream(28);
        for _ in 0..20 {
            let e = random_effect(4, &mut rng).unwrap();
            let povm = Povm::yes_no(e);
            let psi = haar_state(4, &mut rng).unwrap();
            let total: f64 = povm
                .effects()
                .iter()
                .map(|(_, eff)| born_probability(&QuantumState::from(&psi), eff).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn incomplete_povm_is_rejected() {
        let half = Effect::new(HermitianOperator::identity(2).scale(0.5)).unwrap();
        assert!(matches!(
            Povm::new(vec![("a".into(), half)]),
            Err(Error::IncompletePovm { .. })
        ));
    }

    #[test]
    fn diag_part_fixes_diagonal_operators() {
        let a = HermitianOperator::from_real_diagonal(&[0.3, -1.5, 2.0]);
        let basis = Basis::standard(3).unwrap();
        let d = diag_part(&a, &basis).unwrap();
        assert!(max_dev(d.matrix(), a.matrix()) < 1e-15);
    }

    #[test]
    fn diag_part_of_equal_superposition_projector() {
        let psi = StateVector::uniform(2).unwrap();
        let mut amps = CVector::zeros(4);
        amps[0] = psi.amplitudes()[0];
        amps[1] = psi.amplitudes()[1];
        let psi4 = StateVector::new(amps).unwrap();
        let basis = Basis::standard(4).unwrap();
        let d = diag_part(&psi4.projector(), &basis).unwrap();
        let expected = HermitianOperator::from_real_diagonal(&[0.5, 0.5, 0.0, 0.0]);
        assert!(max_dev(d.matrix(), expected.matrix()) < 1e-14);
    }

    #[test]
    fn diag_part_preserves_trace_and_is_idempotent() {
        let mut rng = master_stream(29);
        let basis = Basis::standard(4).unwrap();
        for _ in 0..20 {
            let e = random_effect(4, &mut rng).unwrap();
            let a = e.operator().clone();
            let d = diag_part(&a, &basis).unwrap();
            assert!((d.trace() - a.trace()).abs() < 1e-12);
            let dd = diag_part(&d, &basis).unwrap();
            assert!(max_dev(dd.matrix(), d.matrix()) < 1e-14);
        }
    }

    #[test]
    fn diag_part_in_rotated_basis_preserves_trace() {
        let mut rng = master_stream(30);
        let u = haar_unitary(3, &mut rng).unwrap();
        let basis = Basis::from_columns(u).unwrap();
        let a = random_effect(3, &mut rng).unwrap().operator().clone();
        let d = diag_part(&a, &basis).unwrap();
        assert!((d.trace() - a.trace()).abs() < 1e-12);
        let dd = diag_part(&d, &basis).unwrap();
        assert!(max_dev(dd.matrix(), d.matrix()) < 1e-12);
    }

    #[test]
    fn diag_part_maps_density_to_density() {
        let mut rng = master_stream(31);
        let basis = Basis::standard(4).unwrap();
        for _ in 0..10 {
            let psi = haar_state(4, &mut rng).unwrap();
            let rho = DensityMatrix::pure(&psi);
            let d = diag_part(rho.operator(), &basis).unwrap();
            // Positivity and unit trace survive the diagonal projection.
            assert!(DensityMatrix::new(d).is_ok());
        }
    }

    #[test]
    fn positive_part_of_signature_matrix() {
        let a = HermitianOperator::from_real_diagonal(&[1.0, -1.0]);
        let (p_plus, _p_zero, s) = positive_part_projector(&a, None).unwrap();
        let expected = HermitianOperator::from_real_diagonal(&[1.0, 0.0]);
        assert!(max_dev(p_plus.operator().matrix(), expected.matrix()) < 1e-12);
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn positive_part_of_zero_operator() {
        let a = HermitianOperator::zeros(3);
        let (p_plus, p_zero, s) = positive_part_projector(&a, None).unwrap();
        assert!(
            max_dev(
                p_plus.operator().matrix(),
                HermitianOperator::zeros(3).matrix()
            ) < 1e-12
        );
        assert!(
            max_dev(
                p_zero.operator().matrix(),
                HermitianOperator::identity(3).matrix()
            ) < 1e-12
        );
        assert_eq!(s, 0.0);
    }

    #[test]
    fn positive_part_spectral_identity() {
        // tr(P_plus A) equals the positive eigenvalue sum.
        let mut rng = master_stream(32);
        for _ in 0..20 {
            let e1 = random_effect(4, &mut rng).unwrap();
            let e2 = random_effect(4, &mut rng).unwrap();
            let a = e1.operator().sub(e2.operator()).unwrap();
            let (p_plus, p_zero, s) = positive_part_projector(&a, None).unwrap();
            let tr = p_plus.operator().trace_product(&a).unwrap();
            assert!((tr - s).abs() < 1e-10);
            // Idempotence and mutual orthogonality.
            assert!(p_plus.is_projector(1e-10));
            assert!(p_zero.is_projector(1e-10));
            let cross = p_plus.operator().matrix() * p_zero.operator().matrix();
            assert!(cross.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-10);
        }
    }

    #[test]
    fn positive_part_three_way_split_sums_to_identity() {
        let mut rng = master_stream(33);
        let e1 = random_effect(3, &mut rng).unwrap();
        let e2 = random_effect(3, &mut rng).unwrap();
        let a = e1.operator().sub(e2.operator()).unwrap();
        let (p_plus, p_zero, _) = positive_part_projector(&a, None).unwrap();
        // P_minus is the leftover projector.
        let p_minus =
            CMatrix::identity(3, 3) - p_plus.operator().matrix() - p_zero.operator().matrix();
        let residual = p_plus.operator().matrix() + p_zero.operator().matrix() + &p_minus
            - CMatrix::identity(3, 3);
        assert!(residual.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
        // P_minus projects onto strictly negative spectrum: tr(P_minus A) < 0
        // unless A >= 0.
        let p_minus_h = HermitianOperator::new(p_minus).unwrap();
        let tr = p_minus_h.trace_product(&a).unwrap();
        let (vals, _) = a.eigen();
        let neg_sum: f64 = vals.iter().filter(|&&v| v < 0.0).sum();
        assert!((tr - neg_sum).abs() < 1e-10);
    }

    #[test]
    fn positive_part_maximizes_expectation_over_effects() {
        // tr(EA) over 0 <= E <= I is maximized at E = P_plus(A); compare
        // against 1e3 random effects.
        let mut rng = master_stream(34);
        for n in [2usize, 3, 4] {
            let a = {
                let e1 = random_effect(n, &mut rng).unwrap();
                let e2 = random_effect(n, &mut rng).unwrap();
                e1.operator().sub(e2.operator()).unwrap()
            };
            let (p_plus, _, s) = positive_part_projector(&a, None).unwrap();
            let best = p_plus.operator().trace_product(&a).unwrap();
            assert!((best - s).abs() < 1e-10);
            for _ in 0..1000 {
                let e = random_effect(n, &mut rng).unwrap();
                let val = e.operator().trace_product(&a).unwrap();
                assert!(
                    val <= best + 1e-10,
                    "random effect beats P_plus: {val} > {best}"
                );
            }
        }
    }

    #[test]
    fn effect_validation_rejects_out_of_range() {
        let too_big = HermitianOperator::from_real_diagonal(&[1.5, 0.0]);
        assert!(matches!(
            Effect::new(too_big),
            Err(Error::EffectOutOfRange { .. })
        ));
        let negative = HermitianOperator::from_real_diagonal(&[-0.2, 0.5]);
        assert!(matches!(
            Effect::new(negative),
            Err(Error::EffectOutOfRange { .. })
        ));
    }

    #[test]
    fn effect_clamps_small_drift() {
        let drift = HermitianOperator::from_real_diagonal(&[1.0 + 5e-11, -5e-11]);
        let e = Effect::new(drift).unwrap();
        let (vals, _) = e.operator().eigen();
        assert!(vals.iter().all(|&v| (-1e-15..=1.0 + 1e-15).contains(&v)));
    }

    #[test]
    fn state_vector_constructors_normalize() {
        let v = CVector::from_vec(vec![C64::new(3.0, 0.0), C64::new(4.0, 0.0)]);
        let psi = StateVector::new(v).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        assert!((psi.amplitudes()[0].re - 0.6).abs() < 1e-12);
        assert!(StateVector::new(CVector::zeros(2)).is_err());
    }

    #[test]
    fn hermitian_constructor_rejects_asymmetric() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn fourier_basis_is_orthonormal() {
        for n in [2usize, 3, 5] {
            assert!(Basis::fourier(n).is_ok());
        }
    }

    #[test]
    fn non_orthonormal_basis_is_rejected() {
        let mut u = CMatrix::identity(2, 2);
        u[(0, 1)] = C64::new(0.5, 0.0);
        assert!(matches!(
            Basis::from_columns(u),
            Err(Error::NonOrthonormalBasis { .. })
        ));
    }

    #[test]
    fn random_povm_is_complete_and_positive() {
        let mut rng = master_stream(36);
        for n in [2usize, 4] {
            let povm = random_povm(n, 3, &mut rng).unwrap();
            assert_eq!(povm.effects().len(), 3);
            // Povm::new already validated completeness; spot-check labels.
            assert_eq!(povm.effects()[0].0, "z0");
        }
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = master_stream(35);
        let u = haar_unitary(4, &mut rng).unwrap();
        let dev = max_dev(&(u.adjoint() * &u), &CMatrix::identity(4, 4));
        assert!(dev < 1e-12);
    }
}
