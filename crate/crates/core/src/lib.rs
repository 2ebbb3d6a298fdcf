//! Numerical toolkit for spontaneous-collapse (GRW) quantum dynamics.
//!
//! The crate has two halves. The finite-dimensional half ([`quantum`],
//! [`collapse`], [`discrimination`]) models a one-shot collapse channel on an
//! n-dimensional Hilbert space and answers, by exact linear algebra and Monte
//! Carlo, how reliably any yes/no experiment can retrodict whether a collapse
//! occurred: reliability functionals, blind guessing, Helstrom-optimal
//! detectors, Bayesian posteriors, and success-set scans. The grid half
//! ([`grw`], [`mass`]) simulates the full GRW stochastic process on a
//! discretized one-dimensional configuration space, producing flash records
//! and mass-density fields, and quantifies how accurately a coarse-grained
//! mass density can be measured by position sampling.
//!
//! All randomness flows through explicit seeded streams ([`rng`]); every
//! Monte Carlo routine is bit-reproducible for a given master seed,
//! independent of worker count.

pub mod collapse;
pub mod discrimination;
pub mod error;
pub mod grw;
pub mod mass;
pub mod quantum;
pub mod rng;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use quantum::{
    Basis, DensityMatrix, Effect, HermitianOperator, Povm, QuantumState, StateVector,
};
