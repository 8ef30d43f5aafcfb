//! Train a tiny TCN or GRU on the synthetic training split and report the
//! relative drop in training MSE.
//!
//! cargo run --release --example train_regressor -- [tcn|gru] [epochs]

use aia::models::{mse, train, ArchKind, Architecture, SequenceRegressor, TrainConfig};
use aia::skeldata::{split_by_sets, synth_generate, DEFAULT_HELD_OUT};

fn main() -> aia::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: ArchKind = args.next().unwrap_or_else(|| "tcn".into()).parse()?;
    let epochs = args.next().map(|e| e.parse().expect("epochs")).unwrap_or(300);

    let records = synth_generate(0, 5, 30, 15)?;
    let split = split_by_sets(&records, &DEFAULT_HELD_OUT)?;
    let model = SequenceRegressor::new(Architecture::tiny(kind, 45), 0)?;
    let cfg = TrainConfig { epochs, learning_rate: 5e-3, seed: 0, batch_size: None };
    let (model, history) = train(model, &split.train, &cfg)?;

    for (i, l) in history.epoch_loss.iter().enumerate().step_by((epochs / 10).max(1)) {
        println!("epoch {i:>5}  mse {l:.6}");
    }
    println!("relative train mse {:.2e}", history.relative_final_loss());
    println!("test mse {:.6}", mse(&model, &split.test)?);
    Ok(())
}
