//! Unitary evolution between collapses.
//!
//! Free evolution is exact on the periodic grid: FFT to momentum space,
//! multiply by the kinetic phases exp(-i k^2 dt / 2m_i), transform back.
//! With a potential the step is symmetric (Strang) split-step
//! exp(-iV tau/2) exp(-iK tau) exp(-iV tau/2); the substep count is doubled
//! until halving the substep changes the state by less than 1e-8 in L^2.

use std::sync::Arc;

use ndarray::Axis;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grw::config::{GrwConfig, PotentialSpec};
use crate::grw::grid::{Grid, GridWaveFunction};
use crate::quantum::C64;

/// L^2 distance threshold of the substep-halving convergence test.
pub const SPLIT_STEP_TOL: f64 = 1e-8;

/// Reusable evolution engine for one configuration (FFT plans and per-axis
/// tables are built once).
pub struct Propagator {
    grid: Grid,
    masses: Vec<f64>,
    potential: PotentialSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// k_j^2 for each grid index j (shared across axes).
    k_squared: Vec<f64>,
    /// Per-axis potential samples v_i(x_j); empty for a zero potential.
    v_axis: Vec<Vec<f64>>,
}

impl Propagator {
    pub fn new(config: &GrwConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.grid()?;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.points);
        let inverse = planner.plan_fft_inverse(grid.points);
        let k_squared = (0..grid.points)
            .map(|j| {
                let f = if j <= grid.points / 2 {
                    j as f64
                } else {
                    j as f64 - grid.points as f64
                };
                let k = 2.0 * std::f64::consts::PI * f / grid.length;
                k * k
            })
            .collect();
        let v_axis = match &config.potential {
            PotentialSpec::Zero => Vec::new(),
            PotentialSpec::Harmonic { omega } => (0..grid.n_particles)
                .map(|i| {
                    (0..grid.points)
                        .map(|j| {
                            let x = grid.coord(j);
                            0.5 * config.system.masses[i] * omega * omega * x * x
                        })
                        .collect()
                })
                .collect(),
        };
        Ok(Self {
            grid,
            masses: config.system.masses.clone(),
            potential: config.potential.clone(),
            forward,
            inverse,
            k_squared,
            v_axis,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Unitary evolution by `dt`; exact for a zero potential, adaptive
    /// split-step otherwise. Norm is preserved to FFT roundoff.
    pub fn evolve(&self, psi: &GridWaveFunction, dt: f64) -> Result<GridWaveFunction> {
        if dt < 0.0 || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "dt = {dt} must be non-negative"
            )));
        }
        if psi.grid() != &self.grid {
            return Err(Error::InvalidArgument(
                "state grid does not match propagator".into(),
            ));
        }
        if dt == 0.0 {
            return Ok(psi.clone());
        }
        if matches!(self.potential, PotentialSpec::Zero) {
            let mut out = psi.clone();
            self.apply_kinetic(&mut out, dt);
            return Ok(out);
        }
        // Split-step with the substep count doubled until a full halving
        // changes the state by less than SPLIT_STEP_TOL.
        let mut substeps: usize = 1;
        let mut coarse = self.split_step(psi, dt, substeps);
        loop {
            let fine = self.split_step(psi, dt, substeps * 2);
            if l2_distance(&coarse, &fine) < SPLIT_STEP_TOL {
                return Ok(fine);
            }
            substeps *= 2;
            coarse = fine;
            if substeps > (1 << 22) {
                return Err(Error::Numerical(
                    "split-step failed to converge within the substep cap".into(),
                ));
            }
        }
    }

    fn split_step(&self, psi: &GridWaveFunction, dt: f64, substeps: usize) -> GridWaveFunction {
        let tau = dt / substeps as f64;
        let mut out = psi.clone();
        for _ in 0..substeps {
            self.apply_potential_phase(&mut out, 0.5 * tau);
            self.apply_kinetic(&mut out, tau);
            self.apply_potential_phase(&mut out, 0.5 * tau);
        }
        out
    }

    /// Multiply by exp(-i V tau) pointwise; V is separable per axis.
    fn apply_potential_phase(&self, psi: &mut GridWaveFunction, tau: f64) {
        if self.v_axis.is_empty() {
            return;
        }
        let phases: Vec<Vec<C64>> = self
            .v_axis
            .iter()
            .map(|v| {
                v.iter()
                    .map(|&val| C64::new(0.0, -val * tau).exp())
                    .collect()
            })
            .collect();
        for (idx, z) in psi.data_mut().indexed_iter_mut() {
            let mut phase = C64::new(1.0, 0.0);
            for (axis, table) in phases.iter().enumerate() {
                phase *= table[idx[axis]];
            }
            *z *= phase;
        }
    }

    /// Exact kinetic propagation: FFT all axes, multiply the momentum
    /// phases, inverse FFT all axes.
    fn apply_kinetic(&self, psi: &mut GridWaveFunction, dt: f64) {
        let n_axes = self.grid.n_particles;
        for axis in 0..n_axes {
            self.fft_axis(psi, axis, true);
        }
        let phases: Vec<Vec<C64>> = (0..n_axes)
            .map(|i| {
                self.k_squared
                    .iter()
                    .map(|&k2| C64::new(0.0, -k2 * dt / (2.0 * self.masses[i])).exp())
                    .collect()
            })
            .collect();
        for (idx, z) in psi.data_mut().indexed_iter_mut() {
            let mut phase = C64::new(1.0, 0.0);
            for (axis, table) in phases.iter().enumerate() {
                phase *= table[idx[axis]];
            }
            *z *= phase;
        }
        for axis in 0..n_axes {
            self.fft_axis(psi, axis, false);
        }
    }

    fn fft_axis(&self, psi: &mut GridWaveFunction, axis: usize, forward: bool) {
        let plan = if forward {
            &self.forward
        } else {
            &self.inverse
        };
        let scale = if forward {
            1.0
        } else {
            1.0 / self.grid.points as f64
        };
        let mut buffer = vec![C64::new(0.0, 0.0); self.grid.points];
        for mut lane in psi.data_mut().lanes_mut(Axis(axis)) {
            for (b, z) in buffer.iter_mut().zip(lane.iter()) {
                *b = *z;
            }
            plan.process(&mut buffer);
            for (z, b) in lane.iter_mut().zip(buffer.iter()) {
                *z = b.scale(scale);
            }
        }
    }
}

fn l2_distance(a: &GridWaveFunction, b: &GridWaveFunction) -> f64 {
    let sq: f64 = a
        .data()
        .iter()
        .zip(b.data().iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    (sq * a.grid().cell_volume()).sqrt()
}

/// One-call evolution for callers without a cached [`Propagator`].
pub fn evolve_schrodinger(
    psi: &GridWaveFunction,
    config: &GrwConfig,
    dt: f64,
) -> Result<GridWaveFunction> {
    Propagator::new(config)?.evolve(psi, dt)
}
