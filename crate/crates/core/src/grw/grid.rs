//! Periodic configuration grid and the dense wave function living on it.

use ndarray::{ArrayD, IxDyn};

use crate::error::{Error, Result};
use crate::quantum::C64;

/// Geometry of the configuration space: N particles, each on the same
/// periodic one-dimensional grid of `points` nodes spanning `length`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub n_particles: usize,
    pub points: usize,
    pub length: f64,
}

impl Grid {
    pub fn new(n_particles: usize, points: usize, length: f64) -> Result<Self> {
        if n_particles == 0 {
            return Err(Error::InvalidArgument(
                "n_particles must be at least 1".into(),
            ));
        }
        if points < 2 {
            return Err(Error::InvalidArgument(
                "grid needs at least 2 points".into(),
            ));
        }
        if length.is_nan() || length <= 0.0 {
            return Err(Error::InvalidArgument("box length must be positive".into()));
        }
        Ok(Self {
            n_particles,
            points,
            length,
        })
    }

    /// Grid spacing; the box holds `points` cells (periodic).
    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Node coordinate x_j = -length/2 + j dx.
    pub fn coord(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.spacing()
    }

    /// Nearest node index to a coordinate (periodic wrap).
    pub fn nearest_node(&self, x: f64) -> usize {
        let dx = self.spacing();
        let j = ((x + 0.5 * self.length) / dx).round() as i64;
        j.rem_euclid(self.points as i64) as usize
    }

    /// Minimum-image displacement a - b on the ring.
    pub fn wrapped_displacement(&self, a: f64, b: f64) -> f64 {
        let mut d = (a - b) % self.length;
        if d > 0.5 * self.length {
            d -= self.length;
        } else if d < -0.5 * self.length {
            d += self.length;
        }
        d
    }

    /// Total configuration cells points^n_particles, or an error when it
    /// does not fit a usize.
    pub fn total_cells(&self) -> Result<usize> {
        let mut total: usize = 1;
        for _ in 0..self.n_particles {
            total = total
                .checked_mul(self.points)
                .ok_or_else(|| Error::Numerical("configuration grid size overflow".into()))?;
        }
        Ok(total)
    }

    /// Array shape [points; n_particles].
    pub fn shape(&self) -> Vec<usize> {
        vec![self.points; self.n_particles]
    }

    /// Configuration volume element dx^N.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n_particles as i32)
    }
}

/// Dense wave function over the N-fold product grid, kept at unit discrete
/// L^2 norm.
#[derive(Debug, Clone)]
pub struct GridWaveFunction {
    data: ArrayD<C64>,
    grid: Grid,
}

impl GridWaveFunction {
    /// Wraps and normalizes amplitude data of the right shape.
    pub fn new(data: ArrayD<C64>, grid: Grid) -> Result<Self> {
        if data.shape() != grid.shape().as_slice() {
            return Err(Error::InvalidArgument(format!(
                "amplitude shape {:?} does not match grid shape {:?}",
                data.shape(),
                grid.shape()
            )));
        }
        let mut psi = Self { data, grid };
        psi.renormalize()?;
        Ok(psi)
    }

    /// Product of per-particle Gaussian packets
    /// exp(-(x-c_i)^2 / (4 w_i^2) + i k_i x), periodically wrapped.
    pub fn gaussian_product(
        grid: &Grid,
        centers: &[f64],
        widths: &[f64],
        momenta: &[f64],
    ) -> Result<Self> {
        let n = grid.n_particles;
        if centers.len() != n || widths.len() != n || momenta.len() != n {
            return Err(Error::InvalidArgument(format!(
                "need {n} centers/widths/momenta for {n} particles"
            )));
        }
        if widths.iter().any(|&w| w.is_nan() || w <= 0.0) {
            return Err(Error::InvalidArgument(
                "packet widths must be positive".into(),
            ));
        }
        // Per-axis 1-D packets; the product state is assembled elementwise.
        let axis_packets: Vec<Vec<C64>> = (0..n)
            .map(|i| {
                (0..grid.points)
                    .map(|j| {
                        let d = grid.wrapped_displacement(grid.coord(j), centers[i]);
                        let envelope = (-d * d / (4.0 * widths[i] * widths[i])).exp();
                        let phase = momenta[i] * grid.coord(j);
                        C64::new(phase.cos(), phase.sin()).scale(envelope)
                    })
                    .collect()
            })
            .collect();
        let shape = grid.shape();
        let mut data = ArrayD::<C64>::zeros(IxDyn(&shape));
        for (idx, value) in data.indexed_iter_mut() {
            let mut amp = C64::new(1.0, 0.0);
            for (axis, packet) in axis_packets.iter().enumerate() {
                amp *= packet[idx[axis]];
            }
            *value = amp;
        }
        Self::new(data, grid.clone())
    }

    /// Single-particle superposition of two packets at +/- separation/2 with
    /// amplitude weights sqrt(weight_here) and sqrt(1 - weight_here).
    pub fn two_packet(grid: &Grid, separation: f64, width: f64, weight_here: f64) -> Result<Self> {
        if grid.n_particles != 1 {
            return Err(Error::InvalidArgument(
                "two-packet initial state requires a single particle".into(),
            ));
        }
        if weight_here.is_nan() || weight_here <= 0.0 || weight_here >= 1.0 {
            return Err(Error::InvalidArgument(
                "weight_here must lie strictly in (0,1)".into(),
            ));
        }
        let here = Self::gaussian_product(grid, &[-0.5 * separation], &[width], &[0.0])?;
        let there = Self::gaussian_product(grid, &[0.5 * separation], &[width], &[0.0])?;
        let c_here = weight_here.sqrt();
        let c_there = (1.0 - weight_here).sqrt();
        let data = here.data.mapv(|z| z.scale(c_here)) + there.data.mapv(|z| z.scale(c_there));
        Self::new(data, grid.clone())
    }

    /// Product of per-particle top-hat (indicator) packets: particle i has
    /// constant amplitude on [start_i, start_i + len_i) and zero elsewhere.
    /// Edges snap to grid nodes.
    pub fn top_hat_product(grid: &Grid, starts: &[f64], lens: &[f64]) -> Result<Self> {
        let n = grid.n_particles;
        if starts.len() != n || lens.len() != n {
            return Err(Error::InvalidArgument(format!("need {n} starts and lens")));
        }
        if lens.iter().any(|&l| l.is_nan() || l <= 0.0) {
            return Err(Error::InvalidArgument(
                "top-hat lengths must be positive".into(),
            ));
        }
        let dx = grid.spacing();
        let axis_packets: Vec<Vec<C64>> = (0..n)
            .map(|i| {
                let start_node = grid.nearest_node(starts[i]);
                let len_nodes = ((lens[i] / dx).round() as usize).max(1);
                (0..grid.points)
                    .map(|j| {
                        let inside = (j + grid.points - start_node) % grid.points < len_nodes;
                        C64::new(if inside { 1.0 } else { 0.0 }, 0.0)
                    })
                    .collect()
            })
            .collect();
        let mut data = ArrayD::<C64>::zeros(IxDyn(&grid.shape()));
        for (idx, value) in data.indexed_iter_mut() {
            let mut amp = C64::new(1.0, 0.0);
            for (axis, packet) in axis_packets.iter().enumerate() {
                amp *= packet[idx[axis]];
            }
            *value = amp;
        }
        Self::new(data, grid.clone())
    }

    /// Single-particle superposition of two top-hats of length `width` at
    /// +/- separation/2, with probability weights weight_here and
    /// 1 - weight_here. Supports are exactly disjoint when separation
    /// exceeds the width.
    pub fn two_top_hat(grid: &Grid, separation: f64, width: f64, weight_here: f64) -> Result<Self> {
        if grid.n_particles != 1 {
            return Err(Error::InvalidArgument(
                "two-top-hat initial state requires a single particle".into(),
            ));
        }
        if weight_here.is_nan() || weight_here <= 0.0 || weight_here >= 1.0 {
            return Err(Error::InvalidArgument(
                "weight_here must lie strictly in (0,1)".into(),
            ));
        }
        if separation <= width {
            return Err(Error::InvalidArgument(
                "top-hat branches must not overlap: separation must exceed width".into(),
            ));
        }
        let here = Self::top_hat_product(grid, &[-0.5 * separation - 0.5 * width], &[width])?;
        let there = Self::top_hat_product(grid, &[0.5 * separation - 0.5 * width], &[width])?;
        let data = here.data.mapv(|z| z.scale(weight_here.sqrt()))
            + there.data.mapv(|z| z.scale((1.0 - weight_here).sqrt()));
        Self::new(data, grid.clone())
    }

    /// All amplitude in a single configuration cell.
    pub fn point_mass(grid: &Grid, cell: &[usize]) -> Result<Self> {
        if cell.len() != grid.n_particles {
            return Err(Error::InvalidArgument("cell index arity mismatch".into()));
        }
        let mut data = ArrayD::<C64>::zeros(IxDyn(&grid.shape()));
        data[IxDyn(cell)] = C64::new(1.0, 0.0);
        Self::new(data, grid.clone())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &ArrayD<C64> {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut ArrayD<C64> {
        &mut self.data
    }

    /// Discrete L^2 norm sqrt(sum |psi|^2 dx^N).
    pub fn norm(&self) -> f64 {
        let sq: f64 = self.data.iter().map(|z| z.norm_sqr()).sum();
        (sq * self.grid.cell_volume()).sqrt()
    }

    pub fn renormalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let inv = 1.0 / norm;
        self.data.mapv_inplace(|z| z.scale(inv));
        Ok(())
    }

    /// Overlap ⟨self|other⟩ with the discrete measure.
    pub fn overlap(&self, other: &Self) -> Result<C64> {
        if self.grid != other.grid {
            return Err(Error::InvalidArgument("grids differ".into()));
        }
        let mut acc = C64::new(0.0, 0.0);
        for (a, b) in self.data.iter().zip(other.data.iter()) {
            acc += a.conj() * b;
        }
        Ok(acc.scale(self.grid.cell_volume()))
    }

    /// |⟨self|other⟩|^2.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.overlap(other)?.norm_sqr())
    }

    /// Marginal probability density of particle `axis`:
    /// rho_i(x_j) = sum over the other coordinates of |psi|^2 dx^{N-1};
    /// integrates (sum rho dx) to 1.
    pub fn marginal(&self, axis: usize) -> Result<Vec<f64>> {
        if axis >= self.grid.n_particles {
            return Err(Error::InvalidArgument(format!(
                "axis {axis} out of 0..{}",
                self.grid.n_particles
            )));
        }
        let mut out = vec![0.0; self.grid.points];
        let weight = self.grid.spacing().powi(self.grid.n_particles as i32 - 1);
        for (idx, z) in self.data.indexed_iter() {
            out[idx[axis]] += z.norm_sqr() * weight;
        }
        Ok(out)
    }

    /// Mean and variance of the marginal of `axis` (no unwrapping; callers
    /// keep packets away from the boundary).
    pub fn marginal_moments(&self, axis: usize) -> Result<(f64, f64)> {
        let rho = self.marginal(axis)?;
        let dx = self.grid.spacing();
        let mean: f64 = rho
            .iter()
            .enumerate()
            .map(|(j, r)| self.grid.coord(j) * r * dx)
            .sum();
        let var: f64 = rho
            .iter()
            .enumerate()
            .map(|(j, r)| {
                let d = self.grid.coord(j) - mean;
                d * d * r * dx
            })
            .sum();
        Ok((mean, var))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let grid = Grid::new(2, 8, 4.0).unwrap();
        assert_eq!(grid.spacing(), 0.5);
        assert_eq!(grid.coord(0), -2.0);
        assert_eq!(grid.coord(4), 0.0);
        assert_eq!(grid.total_cells().unwrap(), 64);
        assert_eq!(grid.shape(), vec![8, 8]);
        // 1.9 and -1.9 are 0.2 apart across the periodic boundary.
        assert!((grid.wrapped_displacement(1.9, -1.9) + 0.2).abs() < 1e-12);
    }

    #[test]
    fn wave_function_is_normalized() {
        let grid = Grid::new(1, 64, 16.0).unwrap();
        let psi = GridWaveFunction::gaussian_product(&grid, &[0.0], &[1.0], &[0.0]).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        let rho = psi.marginal(0).unwrap();
        let total: f64 = rho.iter().map(|r| r * grid.spacing()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_packet_weights_split_correctly() {
        let grid = Grid::new(1, 128, 16.0).unwrap();
        let psi = GridWaveFunction::two_packet(&grid, 8.0, 0.4, 0.3).unwrap();
        let rho = psi.marginal(0).unwrap();
        let dx = grid.spacing();
        let left: f64 = rho
            .iter()
            .enumerate()
            .filter(|(j, _)| grid.coord(*j) < 0.0)
            .map(|(_, r)| r * dx)
            .sum();
        assert!((left - 0.3).abs() < 1e-9, "left mass {left}");
    }

    #[test]
    fn product_state_marginals_factorize() {
        let grid = Grid::new(2, 32, 16.0).unwrap();
        let psi = GridWaveFunction::gaussian_product(&grid, &[-2.0, 3.0], &[0.8, 0.5], &[0.0, 0.0])
            .unwrap();
        let single = Grid::new(1, 32, 16.0).unwrap();
        let phi0 = GridWaveFunction::gaussian_product(&single, &[-2.0], &[0.8], &[0.0]).unwrap();
        let phi1 = GridWaveFunction::gaussian_product(&single, &[3.0], &[0.5], &[0.0]).unwrap();
        let m0 = psi.marginal(0).unwrap();
        let m1 = psi.marginal(1).unwrap();
        let e0 = phi0.marginal(0).unwrap();
        let e1 = phi1.marginal(0).unwrap();
        for j in 0..32 {
            assert!((m0[j] - e0[j]).abs() < 1e-12);
            assert!((m1[j] - e1[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn point_mass_marginal_is_a_spike() {
        let grid = Grid::new(1, 16, 8.0).unwrap();
        let psi = GridWaveFunction::point_mass(&grid, &[5]).unwrap();
        let rho = psi.marginal(0).unwrap();
        assert!((rho[5] - 1.0 / grid.spacing()).abs() < 1e-12);
        assert!(rho
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != 5)
            .all(|(_, &r)| r == 0.0));
    }

    #[test]
    fn packet_moments_match_parameters() {
        let grid = Grid::new(1, 256, 32.0).unwrap();
        let w = 0.9;
        let psi = GridWaveFunction::gaussian_product(&grid, &[1.5], &[w], &[0.0]).unwrap();
        let (mean, var) = psi.marginal_moments(0).unwrap();
        assert!((mean - 1.5).abs() < 1e-9);
        assert!((var - w * w).abs() < 1e-6, "variance {var} vs {}", w * w);
    }
}
