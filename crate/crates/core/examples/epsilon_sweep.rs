//! White-box success rate of a tiny GRU across the standard ε grid, with
//! per-objective tolerances taken from natural output distances.
//!
//! cargo run --release --example epsilon_sweep

use aia::attack::AttackConfig;
use aia::evaluation::{natural_kappas, sample_objectives, whitebox_sweep, ToleranceTable, EPSILON_GRID};
use aia::models::{train, ArchKind, Architecture, SequenceRegressor, TrainConfig};
use aia::skeldata::{split_by_sets, synth_generate, DEFAULT_HELD_OUT};

fn main() -> aia::Result<()> {
    let records = synth_generate(0, 5, 30, 15)?;
    let split = split_by_sets(&records, &DEFAULT_HELD_OUT)?;
    let model = SequenceRegressor::new(Architecture::tiny(ArchKind::Gru, 45), 0)?;
    let (model, _) =
        train(model, &split.train, &TrainConfig { epochs: 300, learning_rate: 5e-3, ..Default::default() })?;

    let objectives = sample_objectives(&split.test, &ToleranceTable::default(), 0)?;
    let objectives = natural_kappas(&model, &split.test, &objectives, 0.25)?;
    // a quarter of the held-out pairs keeps this quick
    let samples: Vec<_> = split.test.iter().step_by(4).cloned().collect();
    let sweep = whitebox_sweep(&model, "gru", &samples, &objectives, &EPSILON_GRID, &AttackConfig::default())?;
    print!("{}", sweep.report.summary());
    println!("mean over objectives: {:?}", sweep.report.mean_rate_per_epsilon());
    Ok(())
}
