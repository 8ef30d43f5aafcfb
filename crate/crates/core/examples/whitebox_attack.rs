//! Attack one held-out actor sequence so that a trained TCN predicts a
//! chosen target reaction, perturbing only joint depth.
//!
//! cargo run --release --example whitebox_attack

use aia::attack::{distance_sum, run_attack, AttackConfig};
use aia::evaluation::percentile;
use aia::models::{train, ArchKind, Architecture, SequenceRegressor, TrainConfig};
use aia::skeldata::{split_by_sets, synth_generate, Interaction, DEFAULT_HELD_OUT};

fn main() -> aia::Result<()> {
    let records = synth_generate(0, 5, 30, 15)?;
    let split = split_by_sets(&records, &DEFAULT_HELD_OUT)?;
    let model = SequenceRegressor::new(Architecture::tiny(ArchKind::Tcn, 45), 0)?;
    let cfg = TrainConfig { epochs: 400, learning_rate: 5e-3, seed: 0, batch_size: None };
    let (model, _) = train(model, &split.train, &cfg)?;

    let target = &split.test.iter().find(|p| p.category == Interaction::Hugging).unwrap().target;
    let natural: Vec<f64> = split
        .test
        .iter()
        .map(|p| distance_sum(&model.predict(&p.input)?, &target.fit_length(p.input.frames())?))
        .collect::<aia::Result<_>>()?;
    let kappa = percentile(&natural, 0.25)?;

    let victim = split.test.iter().position(|p| p.category == Interaction::Departing).unwrap();
    let input = &split.test[victim].input;
    let acfg = AttackConfig { kappa, ..AttackConfig::default() };
    let r = run_attack(&model, input, &target.fit_length(input.frames())?, &acfg)?;

    println!("kappa {kappa:.2}");
    for (m, (l, d)) in r.loss_trace.iter().zip(&r.distance_trace).enumerate().step_by(25) {
        println!("step {m:>3}  loss {l:>8.3}  distance {d:>8.3}");
    }
    println!(
        "distance {:.2} -> {:.2}, success {}, max |delta| {:.3}",
        r.initial_distance, r.distance, r.success, r.max_perturbation
    );
    Ok(())
}
