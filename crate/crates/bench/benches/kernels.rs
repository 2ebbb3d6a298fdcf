//! Benchmarks of the hot kernels: optimal-detector routes, channel Monte
//! Carlo, spectral evolution, and the Gaussian hit.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use grwlab_core::collapse::rho_pair;
use grwlab_core::discrimination::{
    helstrom, mc_reliability, optimal_collapse_detector, YesNoExperiment,
};
use grwlab_core::grw::{apply_grw_hit, GridWaveFunction, GrwConfig, Propagator};
use grwlab_core::quantum::{haar_state, Basis, StateVector};
use grwlab_core::rng::master_stream;

fn bench_detectors(c: &mut Criterion) {
    let mut group = c.benchmark_group("optimal_detector");
    for n in [2usize, 4, 8, 16] {
        let mut rng = master_stream(1);
        let psi = haar_state(n, &mut rng).unwrap();
        let basis = Basis::standard(n).unwrap();
        group.bench_with_input(BenchmarkId::new("closed_form", n), &n, |b, _| {
            b.iter(|| optimal_collapse_detector(black_box(&psi), &basis, 0.3).unwrap())
        });
        let (rho1, rho2) = rho_pair(&psi, &basis).unwrap();
        group.bench_with_input(BenchmarkId::new("spectral", n), &n, |b, _| {
            b.iter(|| helstrom(black_box(&rho1), &rho2, 0.3, None).unwrap())
        });
    }
    group.finish();
}

fn bench_channel_monte_carlo(c: &mut Criterion) {
    let psi = StateVector::uniform(2).unwrap();
    let basis = Basis::standard(2).unwrap();
    let exp = YesNoExperiment::leaves_ray_of(&psi);
    c.bench_function("mc_reliability_10k_trials", |b| {
        b.iter(|| mc_reliability(black_box(&psi), &exp, &basis, 0.4, 10_000, 7, 1).unwrap())
    });
}

fn bench_grw_kernels(c: &mut Criterion) {
    let config = GrwConfig::demo_two_packet();
    let propagator = Propagator::new(&config).unwrap();
    let psi = config.initial_state().unwrap();
    c.bench_function("spectral_evolve_128", |b| {
        b.iter(|| propagator.evolve(black_box(&psi), 0.5).unwrap())
    });
    let grid = config.grid().unwrap();
    let two_packet = GridWaveFunction::two_packet(&grid, 4.0, 0.25, 0.5).unwrap();
    c.bench_function("grw_hit_128", |b| {
        let mut rng = master_stream(2);
        b.iter(|| apply_grw_hit(black_box(&two_packet), 0, 0.4, &mut rng).unwrap())
    });
}

criterion_group!(
    benches,
    bench_detectors,
    bench_channel_monte_carlo,
    bench_grw_kernels
);
criterion_main!(benches);
