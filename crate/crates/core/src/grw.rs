//! Simulator of the GRW stochastic wave-function process on a discretized
//! configuration space.
//!
//! N particles live on a periodic one-dimensional grid of L points; the
//! joint wave function is a dense complex array over the L^N product grid.
//! Between collapses the state evolves unitarily (spectral propagation,
//! split-step when a potential is present). At Poisson times of rate
//! N*lambda a randomly chosen particle is hit: the wave function is
//! multiplied by the square root of a Gaussian of width sigma centered at a
//! random point X drawn from the exact collapse-center density, producing a
//! flash record (X, T, I).
//!
//! Units are natural (hbar = 1). The SI values usually quoted for the GRW
//! constants are lambda ~ 1e-16 per second per particle (1e-15 in some
//! flash-count estimates) and sigma ~ 1e-7 m; the simulation treats both as
//! free parameters.

mod config;
mod density;
mod grid;
mod hit;
mod propagator;
mod run;

pub use config::{
    CollapseParams, GrwConfig, InitialStateSpec, PotentialSpec, RunParams, SystemParams,
};
pub use density::{mass_density, mass_density_operator_route, MassDensityField};
pub use grid::{Grid, GridWaveFunction};
pub use hit::{
    apply_grw_hit, collapse_center_distribution, expected_flash_count, sample_flash_schedule,
    FlashEvent,
};
pub use propagator::{evolve_schrodinger, Propagator};
pub use run::{run_grw, run_grw_ensemble, run_grw_with_stream, RunOutput};
