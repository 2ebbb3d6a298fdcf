//! The mass-density field m(x) carried by the wave function: the sum of
//! mass-weighted single-particle marginals, with an independent
//! operator-expectation route for cross-checking.

use crate::error::{Error, Result};
use crate::grw::grid::{Grid, GridWaveFunction};

/// Mass per unit length sampled on the spatial grid.
#[derive(Debug, Clone)]
pub struct MassDensityField {
    values: Vec<f64>,
    grid: Grid,
    pub time: f64,
}

impl MassDensityField {
    pub fn new(values: Vec<f64>, grid: Grid, time: f64) -> Result<Self> {
        if values.len() != grid.points {
            return Err(Error::InvalidArgument(format!(
                "field has {} values for {} grid points",
                values.len(),
                grid.points
            )));
        }
        if values.iter().any(|&v| v < -1e-12) {
            return Err(Error::InvalidArgument(
                "mass density must be non-negative".into(),
            ));
        }
        Ok(Self { values, grid, time })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Integral of the density over the box.
    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.spacing()
    }
}

fn check_masses(psi: &GridWaveFunction, masses: &[f64]) -> Result<()> {
    if masses.len() != psi.grid().n_particles {
        return Err(Error::InvalidArgument(format!(
            "expected {} masses, got {}",
            psi.grid().n_particles,
            masses.len()
        )));
    }
    Ok(())
}

/// m(x) = sum_i m_i rho_i(x) from the per-particle marginals.
pub fn mass_density(psi: &GridWaveFunction, masses: &[f64], time: f64) -> Result<MassDensityField> {
    check_masses(psi, masses)?;
    let grid = psi.grid().clone();
    let mut values = vec![0.0; grid.points];
    for (i, &mass) in masses.iter().enumerate() {
        let marginal = psi.marginal(i)?;
        for (v, r) in values.iter_mut().zip(marginal.iter()) {
            *v += mass * r;
        }
    }
    MassDensityField::new(values, grid, time)
}

/// The same field computed as the expectation of the diagonal mass-density
/// operator sum_i m_i [q_i = x]/dx, accumulated configuration by
/// configuration. Kept as an independent route for consistency checks.
pub fn mass_density_operator_route(
    psi: &GridWaveFunction,
    masses: &[f64],
    time: f64,
) -> Result<MassDensityField> {
    check_masses(psi, masses)?;
    let grid = psi.grid().clone();
    let cell_volume = grid.cell_volume();
    let dx = grid.spacing();
    let mut values = vec![0.0; grid.points];
    for (idx, z) in psi.data().indexed_iter() {
        let weight = z.norm_sqr() * cell_volume;
        if weight == 0.0 {
            continue;
        }
        for (i, &mass) in masses.iter().enumerate() {
            values[idx[i]] += mass * weight / dx;
        }
    }
    MassDensityField::new(values, grid, time)
}
