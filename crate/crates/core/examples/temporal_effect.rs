//! How the temporal term changes the perturbation: the largest frame-to-
//! frame jump of δ with λ = 0.1 against λ = 0, per held-out sample.
//!
//! cargo run --release --example temporal_effect

use aia::attack::{run_attack, AttackConfig};
use aia::evaluation::max_perturbation_jump;
use aia::models::{train, ArchKind, Architecture, SequenceRegressor, TrainConfig};
use aia::skeldata::{split_by_sets, synth_generate, Interaction, DEFAULT_HELD_OUT};

fn main() -> aia::Result<()> {
    let records = synth_generate(0, 5, 30, 15)?;
    let split = split_by_sets(&records, &DEFAULT_HELD_OUT)?;
    let model = SequenceRegressor::new(Architecture::tiny(ArchKind::Tcn, 45), 0)?;
    let (model, _) =
        train(model, &split.train, &TrainConfig { epochs: 300, learning_rate: 5e-3, ..Default::default() })?;
    let target = &split.test.iter().find(|p| p.category == Interaction::Punching).unwrap().target;

    let mut smoother = 0;
    for (i, p) in split.test.iter().enumerate().step_by(2) {
        let y = target.fit_length(p.input.frames())?;
        // κ = 0 keeps both runs going for the full step budget
        let jump = |lambda: f64| -> aia::Result<f64> {
            let cfg = AttackConfig { lambda, kappa: 0.0, ..AttackConfig::default() };
            max_perturbation_jump(&p.input, &run_attack(&model, &p.input, &y, &cfg)?.adversarial)
        };
        let (with, without) = (jump(0.1)?, jump(0.0)?);
        smoother += (with < without) as usize;
        println!("sample {i:>2}: max jump {with:.3} (lambda 0.1) vs {without:.3} (lambda 0)");
    }
    println!("smoother with the temporal term on {smoother} of {} samples", split.test.len().div_ceil(2));
    Ok(())
}
