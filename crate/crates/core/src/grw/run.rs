//! Full GRW runs: Schrödinger evolution interleaved with scheduled hits,
//! emitting flash records and wave-function snapshots.

use crate::error::Result;
use crate::grw::config::GrwConfig;
use crate::grw::grid::GridWaveFunction;
use crate::grw::hit::{apply_grw_hit, sample_flash_schedule, FlashEvent};
use crate::grw::propagator::Propagator;
use crate::rng::{master_stream, Stream};

/// Everything a single run produces.
#[derive(Debug)]
pub struct RunOutput {
    /// (time, state) pairs at the configured cadence plus the final time.
    pub snapshots: Vec<(f64, GridWaveFunction)>,
    /// Time-ordered flash records.
    pub flashes: Vec<FlashEvent>,
}

enum Event {
    Snapshot(f64),
    Hit(f64, usize),
}

impl Event {
    fn time(&self) -> f64 {
        match self {
            Event::Snapshot(t) => *t,
            Event::Hit(t, _) => *t,
        }
    }
}

/// Runs the process from t = 0 to `config.run.t_end` with the seed from the
/// config. Identical config and seed give a bit-identical flash list.
pub fn run_grw(config: &GrwConfig) -> Result<RunOutput> {
    let mut rng = master_stream(config.run.seed);
    run_grw_with_stream(config, &mut rng)
}

/// As [`run_grw`] but drawing from a caller-provided stream, so independent
/// runs can use derived streams and merge by run index.
pub fn run_grw_with_stream(config: &GrwConfig, rng: &mut Stream) -> Result<RunOutput> {
    config.validate()?;
    let t_end = config.run.t_end;
    let propagator = Propagator::new(config)?;
    let mut state = config.initial_state()?;

    let schedule = if t_end > 0.0 {
        sample_flash_schedule(
            config.system.n_particles,
            config.collapse.lambda_rate,
            t_end,
            rng,
        )?
    } else {
        Vec::new()
    };

    // Snapshot times: cadence multiples (including t = 0) and always t_end.
    let mut snapshot_times = Vec::new();
    let cadence = config.run.snapshot_every;
    if cadence > 0.0 {
        let mut k = 0u64;
        loop {
            let t = k as f64 * cadence;
            if t > t_end {
                break;
            }
            snapshot_times.push(t);
            k += 1;
        }
    } else {
        snapshot_times.push(0.0);
    }
    if snapshot_times.last().is_none_or(|&t| t < t_end) {
        snapshot_times.push(t_end);
    }

    // Merge the two event lists; at equal times the snapshot captures the
    // pre-hit state.
    let mut events: Vec<Event> = snapshot_times
        .iter()
        .map(|&t| Event::Snapshot(t))
        .chain(schedule.iter().map(|&(t, label)| Event::Hit(t, label)))
        .collect();
    events.sort_by(|a, b| {
        a.time().total_cmp(&b.time()).then_with(|| {
            let rank = |e: &Event| match e {
                Event::Snapshot(_) => 0,
                Event::Hit(_, _) => 1,
            };
            rank(a).cmp(&rank(b))
        })
    });

    let mut snapshots = Vec::new();
    let mut flashes = Vec::new();
    let mut now = 0.0;
    for event in events {
        let dt = event.time() - now;
        if dt > 0.0 {
            state = propagator.evolve(&state, dt)?;
            now = event.time();
        }
        match event {
            Event::Snapshot(t) => snapshots.push((t, state.clone())),
            Event::Hit(t, label) => {
                let (post, position) =
                    apply_grw_hit(&state, label - 1, config.collapse.sigma, rng)?;
                state = post;
                flashes.push(FlashEvent {
                    time: t,
                    position,
                    particle: label,
                });
            }
        }
    }
    Ok(RunOutput { snapshots, flashes })
}

/// Convenience for statistics over many independent runs: run `runs` copies
/// with derived streams and return each run's flash list, indexed by run.
pub fn run_grw_ensemble(config: &GrwConfig, runs: usize) -> Result<Vec<Vec<FlashEvent>>> {
    (0..runs)
        .map(|r| {
            let mut rng = crate::rng::trial_stream(config.run.seed, r as u64);
            Ok(run_grw_with_stream(config, &mut rng)?.flashes)
        })
        .collect()
}
