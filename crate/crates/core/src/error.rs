//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by construction, validation, and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Hilbert-space dimension must be at least 1.
    #[error("invalid dimension: {0}")]
    InvalidDimension(usize),

    /// Operands live in different Hilbert-space dimensions.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// A vector with zero norm cannot be normalized.
    #[error("cannot normalize a zero vector")]
    ZeroNorm,

    /// Matrix deviates from self-adjointness beyond tolerance.
    #[error("matrix is not Hermitian (max |A - A^dag| entry = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    /// Effect eigenvalues fall outside [0, 1] beyond the validation slack.
    #[error("effect eigenvalues out of [0,1]: min = {min_eig:.3e}, max = {max_eig:.3e}")]
    EffectOutOfRange { min_eig: f64, max_eig: f64 },

    /// Operator fails the density-matrix requirements.
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    /// POVM effects do not sum to the identity within tolerance.
    #[error("POVM effects do not sum to identity (max deviation {deviation:.3e})")]
    IncompletePovm { deviation: f64 },

    /// Basis columns are not orthonormal within tolerance.
    #[error("basis is not orthonormal (max deviation {deviation:.3e})")]
    NonOrthonormalBasis { deviation: f64 },

    /// Outcome probabilities failed an internal consistency check.
    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),

    /// Weighted ensemble with no entries.
    #[error("ensemble has no entries")]
    EmptyEnsemble,

    /// Requested ratio exceeds the range of the detector profile function.
    #[error("ratio {ratio:.6e} exceeds maximum {max:.6e}; the identity-effect branch applies")]
    OutOfBranch { ratio: f64, max: f64 },

    /// Collapse prior of 0 or 1 leaves nothing to discriminate.
    #[error("degenerate collapse prior p = {0}; blind guessing applies")]
    DegeneratePrior(f64),

    /// Conditioning on an outcome of probability zero.
    #[error("cannot condition on outcome {0:?}: it has probability zero")]
    ZeroProbabilityOutcome(String),

    /// Measurement update requested for a non-projective effect.
    #[error("unsupported instrument: {0}")]
    UnsupportedInstrument(String),

    /// Invalid scalar argument.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Configuration field failed validation; `field` is the schema path.
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    /// The configuration grid would exceed the memory budget.
    #[error("grid of {needed_bytes} bytes exceeds memory budget of {budget_bytes} bytes")]
    MemoryBudget {
        needed_bytes: u64,
        budget_bytes: u64,
    },

    /// Numerical failure (degenerate distribution, non-convergence).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Coarse-graining scale incompatible with the grid.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Ghirardi ratio is undefined when the cell carries no mass.
    #[error("undefined ratio: coarse-grained mass vanishes on the cell")]
    UndefinedRatio,
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
