//! Measuring the mass density by position sampling: coarse-grained targets,
//! the sampled-configuration estimators, and the relative-inaccuracy ratio
//! that governs when the coarse-grained density is accurately measurable.
//!
//! The procedure: measure all particle positions at once (outcome Q with the
//! |psi|^2 law), then report either the kernel-smoothed point masses or the
//! per-cell mass average. Both estimators are unbiased for the corresponding
//! coarse graining of m(x); their relative standard deviation decides the
//! accuracy, and for the cell estimator that ratio is computed exactly from
//! the wave function.

use rand::Rng;

use crate::error::{Error, Result};
use crate::grw::{Grid, GridWaveFunction, MassDensityField};

/// How to coarse-grain a density field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoarseGrainKind {
    /// Circular convolution with a Gaussian kernel of width `scale`,
    /// truncated at 8 scale and renormalized.
    Gaussian,
    /// Average over the cell of length `scale` containing the point.
    CellAverage,
}

/// Coarse-graining prescription: kind, length scale, and (for cells) the
/// partition origin offset from the box start.
#[derive(Debug, Clone)]
pub struct CoarseGrainSpec {
    pub kind: CoarseGrainKind,
    /// Length scale of the coarse graining (same length units as the grid).
    pub scale: f64,
    /// Partition origin offset (cell kind only), a multiple of the grid
    /// spacing; cells wrap around the periodic box.
    pub origin_offset: f64,
}

impl CoarseGrainSpec {
    pub fn gaussian(scale: f64) -> Self {
        Self {
            kind: CoarseGrainKind::Gaussian,
            scale,
            origin_offset: 0.0,
        }
    }

    pub fn cell_average(scale: f64) -> Self {
        Self {
            kind: CoarseGrainKind::CellAverage,
            scale,
            origin_offset: 0.0,
        }
    }

    pub fn with_origin_offset(mut self, offset: f64) -> Self {
        self.origin_offset = offset;
        self
    }

    /// Validates the scale against a grid; cell partitions must consist of a
    /// whole number of grid cells tiling the (periodic) box evenly.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let dx = grid.spacing();
        if self.scale <= 0.0 || !self.scale.is_finite() {
            return Err(Error::Resolution(
                "coarse-grain scale must be positive".into(),
            ));
        }
        if self.scale < dx * (1.0 - 1e-9) {
            return Err(Error::Resolution(format!(
                "scale {} is below the grid spacing {dx}",
                self.scale
            )));
        }
        if self.kind == CoarseGrainKind::CellAverage {
            let cells = self.scale / dx;
            if (cells - cells.round()).abs() > 1e-9 {
                return Err(Error::Resolution(format!(
                    "cell length {} is not a whole number of grid cells (spacing {dx})",
                    self.scale
                )));
            }
            let nodes_per_cell = cells.round() as usize;
            if !grid.points.is_multiple_of(nodes_per_cell) {
                return Err(Error::Resolution(format!(
                    "cell length {} does not tile the box of {} nodes evenly",
                    self.scale, grid.points
                )));
            }
            let offset = self.origin_offset / dx;
            if (offset - offset.round()).abs() > 1e-9 {
                return Err(Error::Resolution(
                    "partition origin offset must be a multiple of the grid spacing".into(),
                ));
            }
        }
        Ok(())
    }

    fn nodes_per_cell(&self, grid: &Grid) -> usize {
        (self.scale / grid.spacing()).round() as usize
    }

    fn offset_nodes(&self, grid: &Grid) -> usize {
        let raw = (self.origin_offset / grid.spacing()).round() as i64;
        raw.rem_euclid(grid.points as i64) as usize
    }
}

/// One cell of a partition: `len` consecutive nodes starting at `start`,
/// wrapping around the periodic box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub start: usize,
    pub len: usize,
}

impl Cell {
    pub fn contains(&self, node: usize, points: usize) -> bool {
        (node + points - self.start) % points < self.len
    }

    pub fn length(&self, grid: &Grid) -> f64 {
        self.len as f64 * grid.spacing()
    }
}

/// The cell partition induced by a cell-average spec.
pub fn partition_cells(spec: &CoarseGrainSpec, grid: &Grid) -> Result<Vec<Cell>> {
    spec.validate(grid)?;
    if spec.kind != CoarseGrainKind::CellAverage {
        return Err(Error::InvalidArgument(
            "partition requires the cell-average kind".into(),
        ));
    }
    let k = spec.nodes_per_cell(grid);
    let offset = spec.offset_nodes(grid);
    Ok((0..grid.points / k)
        .map(|i| Cell {
            start: (offset + i * k) % grid.points,
            len: k,
        })
        .collect())
}

/// Gaussian kernel of width `scale` tabulated per node offset, truncated at
/// 8 scale (minimum-image) and renormalized so that sum k dx = 1 exactly.
fn truncated_kernel(grid: &Grid, scale: f64) -> Vec<f64> {
    let dx = grid.spacing();
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * scale);
    let cutoff = 8.0 * scale;
    let mut kernel: Vec<f64> = (0..grid.points)
        .map(|o| {
            let d = grid.wrapped_displacement(o as f64 * dx, 0.0);
            if d.abs() <= cutoff {
                norm * (-d * d / (2.0 * scale * scale)).exp()
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = kernel.iter().sum::<f64>() * dx;
    for k in kernel.iter_mut() {
        *k /= total;
    }
    kernel
}

/// Coarse-grains a density field: Gaussian convolution or per-cell
/// averaging. Total mass is preserved exactly up to roundoff.
pub fn coarse_grain(field: &MassDensityField, spec: &CoarseGrainSpec) -> Result<MassDensityField> {
    let grid = field.grid().clone();
    spec.validate(&grid)?;
    let dx = grid.spacing();
    let values = match spec.kind {
        CoarseGrainKind::Gaussian => {
            let kernel = truncated_kernel(&grid, spec.scale);
            let l = grid.points;
            (0..l)
                .map(|c| {
                    let mut acc = 0.0;
                    for (j, m) in field.values().iter().enumerate() {
                        acc += kernel[(c + l - j) % l] * m * dx;
                    }
                    acc
                })
                .collect()
        }
        CoarseGrainKind::CellAverage => {
            let mut values = vec![0.0; grid.points];
            for cell in partition_cells(spec, &grid)? {
                let mass: f64 = (0..cell.len)
                    .map(|o| field.values()[(cell.start + o) % grid.points] * dx)
                    .sum();
                let average = mass / cell.length(&grid);
                for o in 0..cell.len {
                    values[(cell.start + o) % grid.points] = average;
                }
            }
            values
        }
    };
    MassDensityField::new(values, grid, field.time)
}

/// Coarse-grained mass density straight from a wave function.
pub fn coarse_grain_state(
    psi: &GridWaveFunction,
    masses: &[f64],
    spec: &CoarseGrainSpec,
    time: f64,
) -> Result<MassDensityField> {
    coarse_grain(&crate::grw::mass_density(psi, masses, time)?, spec)
}

/// Joint position measurement outcome: one configuration, as node indices
/// and coordinates.
#[derive(Debug, Clone)]
pub struct PositionSample {
    pub indices: Vec<usize>,
    pub coords: Vec<f64>,
}

/// Exact cumulative-inversion sampler for the |psi(q)|^2 configuration law.
pub struct PositionSampler {
    cumulative: Vec<f64>,
    grid: Grid,
}

impl PositionSampler {
    pub fn new(psi: &GridWaveFunction) -> Self {
        let mut cumulative = Vec::with_capacity(psi.data().len());
        let mut acc = 0.0;
        for z in psi.data().iter() {
            acc += z.norm_sqr();
            cumulative.push(acc);
        }
        Self {
            cumulative,
            grid: psi.grid().clone(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PositionSample {
        let total = *self.cumulative.last().expect("wave function is non-empty");
        let u: f64 = rng.random::<f64>() * total;
        let flat = match self.cumulative.binary_search_by(|c| c.total_cmp(&u)) {
            Ok(i) => (i + 1).min(self.cumulative.len() - 1),
            Err(i) => i.min(self.cumulative.len() - 1),
        };
        // Decode the row-major flat index into per-particle nodes.
        let mut indices = vec![0usize; self.grid.n_particles];
        let mut rem = flat;
        for axis in (0..self.grid.n_particles).rev() {
            indices[axis] = rem % self.grid.points;
            rem /= self.grid.points;
        }
        let coords = indices.iter().map(|&j| self.grid.coord(j)).collect();
        PositionSample { indices, coords }
    }
}

/// One-shot position measurement of all particles.
pub fn sample_position_config<R: Rng + ?Sized>(
    psi: &GridWaveFunction,
    rng: &mut R,
) -> PositionSample {
    PositionSampler::new(psi).sample(rng)
}

/// Estimator field built from one sampled configuration: kernel-smoothed
/// point masses (Gaussian kind) or per-cell mass totals over the cell length
/// (cell kind). Its expectation over samples is the coarse-grained density.
pub fn estimator_field(
    sample: &PositionSample,
    masses: &[f64],
    spec: &CoarseGrainSpec,
    grid: &Grid,
) -> Result<Vec<f64>> {
    spec.validate(grid)?;
    if sample.indices.len() != masses.len() || masses.len() != grid.n_particles {
        return Err(Error::InvalidArgument("sample/mass arity mismatch".into()));
    }
    let l = grid.points;
    match spec.kind {
        CoarseGrainKind::Gaussian => {
            let kernel = truncated_kernel(grid, spec.scale);
            let mut values = vec![0.0; l];
            for (&node, &mass) in sample.indices.iter().zip(masses) {
                for (j, v) in values.iter_mut().enumerate() {
                    *v += mass * kernel[(j + l - node) % l];
                }
            }
            Ok(values)
        }
        CoarseGrainKind::CellAverage => {
            let mut values = vec![0.0; l];
            for cell in partition_cells(spec, grid)? {
                let mass: f64 = sample
                    .indices
                    .iter()
                    .zip(masses)
                    .filter(|(&node, _)| cell.contains(node, l))
                    .map(|(_, &m)| m)
                    .sum();
                let value = mass / cell.length(grid);
                for o in 0..cell.len {
                    values[(cell.start + o) % l] = value;
                }
            }
            Ok(values)
        }
    }
}

/// Exact relative inaccuracy of the cell estimator on one cell: the standard
/// deviation of the cell's mass content (per unit cell length) in the state
/// psi, divided by its mean. Errors when the cell carries no mass.
pub fn ghirardi_ratio(psi: &GridWaveFunction, cell: Cell, masses: &[f64]) -> Result<f64> {
    let grid = psi.grid();
    if masses.len() != grid.n_particles {
        return Err(Error::InvalidArgument("mass arity mismatch".into()));
    }
    let cell_len = cell.length(grid);
    let cell_volume = grid.cell_volume();
    // w(q) = (1/l) sum_i m_i [q_i in C] is diagonal in the position basis.
    // Two passes (mean, then centered variance): the uncentered second
    // moment would lose eigenstates' exact zero under the square root.
    let w_of = |idx: &ndarray::IxDyn| -> f64 {
        masses
            .iter()
            .enumerate()
            .filter(|(i, _)| cell.contains(idx[*i], grid.points))
            .map(|(_, &m)| m)
            .sum::<f64>()
            / cell_len
    };
    let mut mean = 0.0;
    for (idx, z) in psi.data().indexed_iter() {
        let weight = z.norm_sqr() * cell_volume;
        if weight > 0.0 {
            mean += weight * w_of(&idx);
        }
    }
    if mean <= 0.0 {
        return Err(Error::UndefinedRatio);
    }
    let mut variance = 0.0;
    for (idx, z) in psi.data().indexed_iter() {
        let weight = z.norm_sqr() * cell_volume;
        if weight > 0.0 {
            let d = w_of(&idx) - mean;
            variance += weight * d * d;
        }
    }
    Ok(variance.sqrt() / mean)
}

/// One row of a measurability scan: the worst (largest) cell ratio at a
/// given coarse-graining scale.
#[derive(Debug, Clone)]
pub struct MeasurabilityRow {
    pub scale: f64,
    pub max_ratio: f64,
    /// Cells that carried at least the mass floor and entered the maximum.
    pub cells_evaluated: usize,
}

/// Scan outcome over a grid of scales.
#[derive(Debug, Clone)]
pub struct MeasurabilityReport {
    pub rows: Vec<MeasurabilityRow>,
    pub threshold: f64,
    /// Smallest scale whose worst cell ratio beats the threshold, if any.
    pub smallest_passing_scale: Option<f64>,
}

/// Evaluates the cell ratio on every (sufficiently massive) cell for each
/// scale and reports the smallest scale achieving max ratio < threshold.
///
/// Cells holding less than `mass_floor_fraction` of the total mass are
/// excluded: the ratio on an essentially empty cell diverges without
/// describing any matter.
pub fn measurability_report(
    psi: &GridWaveFunction,
    masses: &[f64],
    scales: &[f64],
    threshold: f64,
    mass_floor_fraction: f64,
) -> Result<MeasurabilityReport> {
    if scales.is_empty() {
        return Err(Error::InvalidArgument("no scales supplied".into()));
    }
    let grid = psi.grid();
    let total_mass: f64 = masses.iter().sum();
    let density = crate::grw::mass_density(psi, masses, 0.0)?;
    let mut rows = Vec::with_capacity(scales.len());
    for &scale in scales {
        let spec = CoarseGrainSpec::cell_average(scale);
        spec.validate(grid)?;
        let coarse = coarse_grain(&density, &spec)?;
        let mut max_ratio: f64 = 0.0;
        let mut cells_evaluated = 0;
        for cell in partition_cells(&spec, grid)? {
            let cell_mass = coarse.values()[cell.start] * cell.length(grid);
            if cell_mass < mass_floor_fraction * total_mass {
                continue;
            }
            cells_evaluated += 1;
            max_ratio = max_ratio.max(ghirardi_ratio(psi, cell, masses)?);
        }
        rows.push(MeasurabilityRow {
            scale,
            max_ratio,
            cells_evaluated,
        });
    }
    let smallest_passing_scale = rows
        .iter()
        .filter(|row| row.cells_evaluated > 0 && row.max_ratio < threshold)
        .map(|row| row.scale)
        .fold(None, |best: Option<f64>, s| {
            Some(best.map_or(s, |b| b.min(s)))
        });
    Ok(MeasurabilityReport {
        rows,
        threshold,
        smallest_passing_scale,
    })
}
