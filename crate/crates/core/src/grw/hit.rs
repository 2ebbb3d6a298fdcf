//! The collapse events themselves: Poisson flash schedules, the Gaussian
//! hit applied to the wave function, and the exact collapse-center law.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grw::grid::{Grid, GridWaveFunction};

/// One collapse record: position X, time T, particle label I (1-based).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlashEvent {
    pub time: f64,
    pub position: f64,
    pub particle: usize,
}

/// Expected number of flashes N * lambda * t.
pub fn expected_flash_count(n_particles: f64, lambda_rate: f64, t_end: f64) -> f64 {
    n_particles * lambda_rate * t_end
}

/// Poisson schedule of hit times on [0, t_end] at total rate N * lambda,
/// each time tagged with a particle label drawn uniformly from 1..=N
/// independently of the times. Times are strictly increasing.
pub fn sample_flash_schedule<R: Rng + ?Sized>(
    n_particles: usize,
    lambda_rate: f64,
    t_end: f64,
    rng: &mut R,
) -> Result<Vec<(f64, usize)>> {
    if n_particles == 0 {
        return Err(Error::InvalidArgument(
            "n_particles must be at least 1".into(),
        ));
    }
    if lambda_rate < 0.0 || !lambda_rate.is_finite() {
        return Err(Error::InvalidArgument(
            "lambda_rate must be non-negative".into(),
        ));
    }
    if t_end.is_nan() || t_end <= 0.0 {
        return Err(Error::InvalidArgument("t_end must be positive".into()));
    }
    let rate = n_particles as f64 * lambda_rate;
    let mut schedule = Vec::new();
    if rate == 0.0 {
        return Ok(schedule);
    }
    let mut t = 0.0;
    loop {
        // Exponential gap by inverse transform; 1-u lies in (0, 1].
        let u: f64 = rng.random();
        t -= (1.0 - u).ln() / rate;
        if t > t_end {
            break;
        }
        let label = rng.random_range(0..n_particles) + 1;
        schedule.push((t, label));
    }
    Ok(schedule)
}

/// Periodized 1-D Gaussian of width sigma on the ring, tabulated per index
/// offset: g_per[o] = sum_m g(x_o + m * length).
fn periodized_gaussian(grid: &Grid, sigma: f64) -> Vec<f64> {
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * sigma);
    let images = (8.0 * sigma / grid.length).ceil() as i64 + 1;
    (0..grid.points)
        .map(|o| {
            let base = grid.wrapped_displacement(grid.coord(o), grid.coord(0));
            let mut total = 0.0;
            for m in -images..=images {
                let d = base + m as f64 * grid.length;
                total += norm * (-d * d / (2.0 * sigma * sigma)).exp();
            }
            total
        })
        .collect()
}

/// Collapse-center density rho(x_c) for a hit on `particle_index` (0-based):
/// the marginal |psi|^2 density of that particle convolved with the
/// periodized Gaussian of width sigma. Integrates to 1 on the grid.
pub fn collapse_center_distribution(
    psi: &GridWaveFunction,
    particle_index: usize,
    sigma: f64,
) -> Result<Vec<f64>> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::InvalidArgument("sigma must be positive".into()));
    }
    let grid = psi.grid();
    let marginal = psi.marginal(particle_index)?;
    let kernel = periodized_gaussian(grid, sigma);
    let dx = grid.spacing();
    let l = grid.points;
    let density = (0..l)
        .map(|c| {
            let mut acc = 0.0;
            for (j, m) in marginal.iter().enumerate() {
                let offset = (j + l - c) % l;
                acc += kernel[offset] * m * dx;
            }
            acc
        })
        .collect();
    Ok(density)
}

/// Applies one GRW hit to `particle_index` (0-based): draws the center X
/// from the exact grid law, multiplies the wave function by the square root
/// of the Gaussian factor, and renormalizes. Returns the new state and X.
pub fn apply_grw_hit<R: Rng + ?Sized>(
    psi: &GridWaveFunction,
    particle_index: usize,
    sigma: f64,
    rng: &mut R,
) -> Result<(GridWaveFunction, f64)> {
    let grid = psi.grid().clone();
    let density = collapse_center_distribution(psi, particle_index, sigma)?;
    let dx = grid.spacing();
    let total: f64 = density.iter().map(|r| r * dx).sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::Numerical(
            "collapse-center density is degenerate".into(),
        ));
    }
    // Exact cumulative-sum sampling over grid cells.
    let u: f64 = rng.random::<f64>() * total;
    let mut cumulative = 0.0;
    let mut center = grid.points - 1;
    for (c, r) in density.iter().enumerate() {
        cumulative += r * dx;
        if u < cumulative {
            center = c;
            break;
        }
    }
    let kernel = periodized_gaussian(&grid, sigma);
    let l = grid.points;
    let factors: Vec<f64> = (0..l)
        .map(|j| kernel[(j + l - center) % l].sqrt())
        .collect();
    let mut data = psi.data().clone();
    for (idx, z) in data.indexed_iter_mut() {
        *z = z.scale(factors[idx[particle_index]]);
    }
    // GridWaveFunction::new renormalizes; the 1/N factor is implied.
    let post = GridWaveFunction::new(data, grid.clone())?;
    Ok((post, grid.coord(center)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{master_stream, trial_stream};
    use crate::stats::mean_std;

    #[test]
    fn zero_rate_gives_empty_schedule() {
        let mut rng = master_stream(90);
        let schedule = sample_flash_schedule(5, 0.0, 100.0, &mut rng).unwrap();
        assert!(schedule.is_empty());
    }

    #[test]
    fn macroscopic_flash_count_estimate() {
        // 1e23 particles at 1e-15 per second give 1e8 flashes per second.
        let count = expected_flash_count(1e23, 1e-15, 1.0);
        assert!((count - 1e8).abs() / 1e8 < 1e-12);
    }

    #[test]
    fn schedule_count_matches_poisson_mean() {
        // N = 4, lambda = 0.5, t_end = 100: mean count 200; the average over
        // 1e4 runs must sit within 3 sigma_Poisson / sqrt(runs).
        let runs = 10_000u64;
        let mut counts = Vec::with_capacity(runs as usize);
        for r in 0..runs {
            let mut rng = trial_stream(91, r);
            let schedule = sample_flash_schedule(4, 0.5, 100.0, &mut rng).unwrap();
            counts.push(schedule.len() as f64);
        }
        let (mean, _) = mean_std(&counts);
        let tolerance = 3.0 * (200.0f64).sqrt() / (runs as f64).sqrt();
        assert!(
            (mean - 200.0).abs() < tolerance,
            "mean {mean}, tolerance {tolerance}"
        );
    }

    #[test]
    fn schedule_times_sorted_and_labels_in_range() {
        let mut rng = master_stream(92);
        let schedule = sample_flash_schedule(3, 1.0, 50.0, &mut rng).unwrap();
        assert!(!schedule.is_empty());
        for window in schedule.windows(2) {
            assert!(window[0].0 < window[1].0);
        }
        assert!(schedule
            .iter()
            .all(|&(t, label)| t <= 50.0 && (1..=3).contains(&label)));
    }

    #[test]
    fn labels_are_uniform() {
        let mut rng = master_stream(93);
        let n = 4;
        let schedule = sample_flash_schedule(n, 2.0, 2_000.0, &mut rng).unwrap();
        let mut counts = vec![0.0; n];
        for &(_, label) in &schedule {
            counts[label - 1] += 1.0;
        }
        let expected = vec![schedule.len() as f64 / n as f64; n];
        let outcome = crate::stats::chi_square_test(&counts, &expected, 1e-3);
        assert!(
            outcome.pass,
            "chi2 {} > {}",
            outcome.statistic, outcome.critical
        );
    }

    #[test]
    fn collapse_center_density_normalizes() {
        let grid = Grid::new(1, 128, 16.0).unwrap();
        let psi = GridWaveFunction::two_packet(&grid, 4.0, 0.25, 0.5).unwrap();
        let density = collapse_center_distribution(&psi, 0, 0.4).unwrap();
        let total: f64 = density.iter().map(|r| r * grid.spacing()).sum();
        assert!((total - 1.0).abs() < 1e-10, "density sums to {total}");
    }

    #[test]
    fn hit_preserves_norm() {
        let grid = Grid::new(1, 128, 16.0).unwrap();
        let psi = GridWaveFunction::two_packet(&grid, 4.0, 0.25, 0.5).unwrap();
        let mut rng = master_stream(94);
        for _ in 0..20 {
            let (post, _) = apply_grw_hit(&psi, 0, 0.4, &mut rng).unwrap();
            assert!((post.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn narrow_packet_is_barely_disturbed() {
        // Packet width 0.1 << sigma 2.0: the Gaussian factor is nearly
        // constant over the support, so fidelity stays high and X lands
        // within 3 sigma of the packet center.
        let grid = Grid::new(1, 256, 32.0).unwrap();
        let x0 = 1.5;
        let psi = GridWaveFunction::gaussian_product(&grid, &[x0], &[0.1], &[0.0]).unwrap();
        let sigma = 2.0;
        let mut rng = master_stream(95);
        for _ in 0..50 {
            let (post, x) = apply_grw_hit(&psi, 0, sigma, &mut rng).unwrap();
            assert!(psi.fidelity(&post).unwrap() > 0.99);
            assert!((x - x0).abs() <= 3.0 * sigma, "center {x}");
        }
    }

    #[test]
    fn two_packet_hit_localizes_with_born_frequencies() {
        // Separation 10 sigma: a hit leaves the state essentially in one
        // packet, with the left packet picked at frequency 0.3 +/- MC error.
        // A center drawn between the packets (probability ~3e-5 here) leaves
        // residual coherence, so the < 1e-3 coherence statement is checked
        // on the hit ensemble, not on every single draw.
        let grid = Grid::new(1, 256, 32.0).unwrap();
        let sigma = 0.4;
        let weight_here = 0.3;
        let psi = GridWaveFunction::two_packet(&grid, 10.0 * sigma, 0.2, weight_here).unwrap();
        let trials = 10_000u64;
        let mut left_hits = 0u64;
        let mut coherent_leftovers = 0u64;
        for t in 0..trials {
            let mut rng = trial_stream(96, t);
            let (post, _) = apply_grw_hit(&psi, 0, sigma, &mut rng).unwrap();
            let rho = post.marginal(0).unwrap();
            let dx = grid.spacing();
            let left_mass: f64 = rho
                .iter()
                .enumerate()
                .filter(|(j, _)| grid.coord(*j) < 0.0)
                .map(|(_, r)| r * dx)
                .sum();
            if left_mass.min(1.0 - left_mass) >= 1e-3 {
                coherent_leftovers += 1;
            }
            if left_mass > 0.5 {
                left_hits += 1;
            }
        }
        assert!(
            coherent_leftovers <= 5,
            "{coherent_leftovers} hits failed to localize"
        );
        let freq = left_hits as f64 / trials as f64;
        let stderr = crate::stats::binomial_stderr(weight_here, trials as usize);
        assert!(
            (freq - weight_here).abs() <= 4.0 * stderr,
            "left frequency {freq} vs {weight_here}"
        );
    }

    #[test]
    fn well_separated_hit_always_localizes() {
        // At separation 16 sigma a between-packet center is never drawn at
        // this sample size; every hit leaves minority mass below 1e-3.
        let grid = Grid::new(1, 256, 32.0).unwrap();
        let sigma = 0.4;
        let psi = GridWaveFunction::two_packet(&grid, 16.0 * sigma, 0.2, 0.5).unwrap();
        for t in 0..2_000u64 {
            let mut rng = trial_stream(98, t);
            let (post, _) = apply_grw_hit(&psi, 0, sigma, &mut rng).unwrap();
            let rho = post.marginal(0).unwrap();
            let dx = grid.spacing();
            let left_mass: f64 = rho
                .iter()
                .enumerate()
                .filter(|(j, _)| grid.coord(*j) < 0.0)
                .map(|(_, r)| r * dx)
                .sum();
            assert!(left_mass.min(1.0 - left_mass) < 1e-3);
        }
    }

    #[test]
    fn degenerate_density_is_an_error() {
        let grid = Grid::new(1, 16, 8.0).unwrap();
        let psi = GridWaveFunction::point_mass(&grid, &[3]).unwrap();
        // Zero sigma is rejected before any numerics.
        assert!(apply_grw_hit(&psi, 0, 0.0, &mut master_stream(97)).is_err());
    }
}
