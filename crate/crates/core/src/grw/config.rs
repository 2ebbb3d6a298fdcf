//! Run configuration: system geometry, collapse constants, potential,
//! initial state, and run controls. Deserializes from a TOML document whose
//! schema carries explicit unit annotations (see the field docs and the
//! example shipped with the CLI).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grw::grid::{Grid, GridWaveFunction};

fn config_err(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

/// `[system]`: particle count, grid resolution, and masses.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemParams {
    /// Number of particles N (count).
    pub n_particles: usize,
    /// Grid points L per particle coordinate (count); the joint grid holds
    /// L^N cells.
    pub grid_points: usize,
    /// Periodic box length (natural length units, hbar = 1).
    pub box_length: f64,
    /// Particle masses m_i (natural mass units), one per particle.
    pub masses: Vec<f64>,
}

/// `[collapse]`: the two GRW constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CollapseParams {
    /// Collapse rate per particle lambda (1/time). SI convention puts this
    /// near 1e-16 s^-1 (1e-15 s^-1 in some flash-count estimates); here it
    /// is a free parameter in natural units.
    pub lambda_rate: f64,
    /// Collapse width sigma (length). SI convention: ~1e-7 m.
    pub sigma: f64,
}

/// `[potential]`: external potential, separable across particles.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// Free evolution (exact spectral propagation).
    #[default]
    Zero,
    /// V = sum_i (1/2) m_i omega^2 x_i^2 (omega in 1/time).
    Harmonic { omega: f64 },
}

/// `[initial_state]`: how to build the t = 0 wave function.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialStateSpec {
    /// Product of per-particle Gaussian packets. `centers` (length),
    /// `widths` (length, position-space standard deviation), `momenta`
    /// (1/length), one entry per particle; momenta default to zero.
    Gaussian {
        centers: Vec<f64>,
        widths: Vec<f64>,
        #[serde(default)]
        momenta: Vec<f64>,
    },
    /// Single-particle superposition of two packets `separation` apart
    /// (length), each of width `width` (length); `weight_here` is the
    /// probability weight of the left packet.
    TwoPacket {
        separation: f64,
        width: f64,
        #[serde(default = "default_half")]
        weight_here: f64,
    },
    /// Product of per-particle indicator packets: constant amplitude on
    /// [start_i, start_i + len_i) (lengths), zero elsewhere. Exact cell
    /// eigenstates when aligned with a cell partition.
    TopHat { starts: Vec<f64>, lens: Vec<f64> },
    /// Single-particle superposition of two disjoint indicator packets of
    /// length `width`, `separation` apart (both lengths); exact two-branch
    /// construction for the mass-ratio law.
    TwoTopHat {
        separation: f64,
        width: f64,
        #[serde(default = "default_half")]
        weight_here: f64,
    },
}

fn default_half() -> f64 {
    0.5
}

/// `[run]`: seed, horizon, snapshot cadence, memory budget.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunParams {
    /// Master seed; all randomness in a run derives from it.
    pub seed: u64,
    /// Simulated time horizon (time units).
    pub t_end: f64,
    /// Snapshot cadence (time units); 0 disables intermediate snapshots.
    /// The final state at t_end is always recorded.
    #[serde(default)]
    pub snapshot_every: f64,
    /// Memory budget for the dense configuration grid (MiB).
    #[serde(default = "default_memory_budget_mb")]
    pub memory_budget_mb: u64,
}

fn default_memory_budget_mb() -> u64 {
    // Sized so three particles on a 256-point grid (the intended dense
    // ceiling) fit together with propagation scratch.
    1024
}

/// Complete GRW run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrwConfig {
    pub system: SystemParams,
    pub collapse: CollapseParams,
    #[serde(default)]
    pub potential: PotentialSpec,
    pub initial_state: InitialStateSpec,
    pub run: RunParams,
}

impl GrwConfig {
    /// Validates every field, reporting the schema path of the first
    /// offending entry.
    pub fn validate(&self) -> Result<()> {
        let s = &self.system;
        if s.n_particles == 0 {
            return Err(config_err("system.n_particles", "must be at least 1"));
        }
        if s.grid_points < 2 {
            return Err(config_err("system.grid_points", "must be at least 2"));
        }
        if s.box_length <= 0.0 || !s.box_length.is_finite() {
            return Err(config_err("system.box_length", "must be positive"));
        }
        if s.masses.len() != s.n_particles {
            return Err(config_err(
                "system.masses",
                format!("expected {} entries, got {}", s.n_particles, s.masses.len()),
            ));
        }
        if s.masses.iter().any(|&m| m <= 0.0 || !m.is_finite()) {
            return Err(config_err("system.masses", "must all be positive"));
        }
        if self.collapse.lambda_rate < 0.0 || !self.collapse.lambda_rate.is_finite() {
            return Err(config_err("collapse.lambda_rate", "must be non-negative"));
        }
        if self.collapse.sigma <= 0.0 || !self.collapse.sigma.is_finite() {
            return Err(config_err("collapse.sigma", "must be positive"));
        }
        match &self.potential {
            PotentialSpec::Zero => {}
            PotentialSpec::Harmonic { omega } => {
                if *omega <= 0.0 || !omega.is_finite() {
                    return Err(config_err("potential.omega", "must be positive"));
                }
            }
        }
        match &self.initial_state {
            InitialStateSpec::Gaussian {
                centers,
                widths,
                momenta,
            } => {
                if centers.len() != s.n_particles {
                    return Err(config_err(
                        "initial_state.centers",
                        format!("expected {} entries", s.n_particles),
                    ));
                }
                if widths.len() != s.n_particles {
                    return Err(config_err(
                        "initial_state.widths",
                        format!("expected {} entries", s.n_particles),
                    ));
                }
                if !momenta.is_empty() && momenta.len() != s.n_particles {
                    return Err(config_err(
                        "initial_state.momenta",
                        format!("expected 0 or {} entries", s.n_particles),
                    ));
                }
                if widths.iter().any(|&w| w.is_nan() || w <= 0.0) {
                    return Err(config_err("initial_state.widths", "must all be positive"));
                }
            }
            InitialStateSpec::TwoPacket {
                separation,
                width,
                weight_here,
            }
            | InitialStateSpec::TwoTopHat {
                separation,
                width,
                weight_here,
            } => {
                if s.n_particles != 1 {
                    return Err(config_err(
                        "initial_state.kind",
                        "two-packet states require system.n_particles = 1",
                    ));
                }
                if separation.is_nan() || *separation <= 0.0 {
                    return Err(config_err("initial_state.separation", "must be positive"));
                }
                if width.is_nan() || *width <= 0.0 {
                    return Err(config_err("initial_state.width", "must be positive"));
                }
                if weight_here.is_nan() || *weight_here <= 0.0 || *weight_here >= 1.0 {
                    return Err(config_err(
                        "initial_state.weight_here",
                        "must lie strictly between 0 and 1",
                    ));
                }
                if matches!(self.initial_state, InitialStateSpec::TwoTopHat { .. })
                    && separation <= width
                {
                    return Err(config_err(
                        "initial_state.separation",
                        "must exceed width so the branches stay disjoint",
                    ));
                }
            }
            InitialStateSpec::TopHat { starts, lens } => {
                if starts.len() != s.n_particles || lens.len() != s.n_particles {
                    return Err(config_err(
                        "initial_state.starts",
                        format!("expected {} starts and lens", s.n_particles),
                    ));
                }
                if lens.iter().any(|&l| l.is_nan() || l <= 0.0) {
                    return Err(config_err("initial_state.lens", "must all be positive"));
                }
            }
        }
        if self.run.t_end < 0.0 || !self.run.t_end.is_finite() {
            return Err(config_err("run.t_end", "must be non-negative"));
        }
        if self.run.snapshot_every < 0.0 {
            return Err(config_err("run.snapshot_every", "must be non-negative"));
        }
        self.check_memory_budget()?;
        Ok(())
    }

    /// Dense state plus propagation scratch must fit the configured budget.
    fn check_memory_budget(&self) -> Result<()> {
        let grid = self.grid()?;
        let cells = grid.total_cells()? as u64;
        // state + two propagation copies + per-axis tables (negligible)
        let needed_bytes = cells.saturating_mul(16).saturating_mul(3);
        let budget_bytes = self.run.memory_budget_mb.saturating_mul(1024 * 1024);
        if needed_bytes > budget_bytes {
            return Err(Error::MemoryBudget {
                needed_bytes,
                budget_bytes,
            });
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(
            self.system.n_particles,
            self.system.grid_points,
            self.system.box_length,
        )
    }

    /// Builds the configured initial wave function.
    pub fn initial_state(&self) -> Result<GridWaveFunction> {
        let grid = self.grid()?;
        match &self.initial_state {
            InitialStateSpec::Gaussian {
                centers,
                widths,
                momenta,
            } => {
                let momenta = if momenta.is_empty() {
                    vec![0.0; self.system.n_particles]
                } else {
                    momenta.clone()
                };
                GridWaveFunction::gaussian_product(&grid, centers, widths, &momenta)
            }
            InitialStateSpec::TwoPacket {
                separation,
                width,
                weight_here,
            } => GridWaveFunction::two_packet(&grid, *separation, *width, *weight_here),
            InitialStateSpec::TopHat { starts, lens } => {
                GridWaveFunction::top_hat_product(&grid, starts, lens)
            }
            InitialStateSpec::TwoTopHat {
                separation,
                width,
                weight_here,
            } => GridWaveFunction::two_top_hat(&grid, *separation, *width, *weight_here),
        }
    }

    /// Default demonstration: a single heavy particle in a symmetric
    /// two-packet superposition, with one collapse expected per run.
    pub fn demo_two_packet() -> Self {
        Self {
            system: SystemParams {
                n_particles: 1,
                grid_points: 128,
                box_length: 16.0,
                masses: vec![50.0],
            },
            collapse: CollapseParams {
                lambda_rate: 0.1,
                sigma: 0.4,
            },
            potential: PotentialSpec::Zero,
            initial_state: InitialStateSpec::TwoPacket {
                separation: 4.0,
                width: 0.25,
                weight_here: 0.5,
            },
            run: RunParams {
                seed: 42,
                t_end: 10.0,
                snapshot_every: 2.5,
                memory_budget_mb: 512,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_config_validates() {
        GrwConfig::demo_two_packet().validate().unwrap();
    }

    #[test]
    fn negative_sigma_names_the_field() {
        let mut config = GrwConfig::demo_two_packet();
        config.collapse.sigma = -1.0;
        match config.validate() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "collapse.sigma"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn mass_arity_mismatch_is_rejected() {
        let mut config = GrwConfig::demo_two_packet();
        config.system.masses = vec![1.0, 2.0];
        assert!(
            matches!(config.validate(), Err(Error::Config { field, .. }) if field == "system.masses")
        );
    }

    #[test]
    fn memory_budget_is_enforced() {
        let mut config = GrwConfig::demo_two_packet();
        config.system.n_particles = 3;
        config.system.grid_points = 1024;
        config.system.masses = vec![1.0; 3];
        config.initial_state = InitialStateSpec::Gaussian {
            centers: vec![0.0; 3],
            widths: vec![1.0; 3],
            momenta: vec![],
        };
        config.run.memory_budget_mb = 64;
        assert!(matches!(config.validate(), Err(Error::MemoryBudget { .. })));
    }

    #[test]
    fn toml_round_trip() {
        let config = GrwConfig::demo_two_packet();
        let text = toml::to_string(&config).unwrap();
        let back: GrwConfig = toml::from_str(&text).unwrap();
        back.validate().unwrap();
        assert_eq!(back.system.grid_points, config.system.grid_points);
    }
}
