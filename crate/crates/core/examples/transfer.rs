//! Craft adversarial inputs against one model and replay them against
//! another, printing the black-box transfer matrix.
//!
//! cargo run --release --example transfer

use aia::attack::AttackConfig;
use aia::evaluation::{
    blackbox_transfer, natural_kappas, sample_objectives, whitebox_sweep, ToleranceTable, TransferMatrix,
};
use aia::models::{train, ArchKind, Architecture, SequenceRegressor, TrainConfig};
use aia::skeldata::{split_by_sets, synth_generate, DEFAULT_HELD_OUT};

fn main() -> aia::Result<()> {
    let records = synth_generate(0, 5, 30, 15)?;
    let split = split_by_sets(&records, &DEFAULT_HELD_OUT)?;
    let cfg = TrainConfig { epochs: 300, learning_rate: 5e-3, ..Default::default() };
    let models: Vec<(&str, SequenceRegressor)> = [("tcn", ArchKind::Tcn), ("gru", ArchKind::Gru)]
        .into_iter()
        .map(|(name, kind)| {
            let m = SequenceRegressor::new(Architecture::tiny(kind, 45), 0)?;
            Ok((name, train(m, &split.train, &cfg)?.0))
        })
        .collect::<aia::Result<_>>()?;

    let samples: Vec<_> = split.test.iter().step_by(4).cloned().collect();
    let objectives = sample_objectives(&split.test, &ToleranceTable::default(), 0)?;
    let mut matrix = TransferMatrix::default();
    for (src_name, src) in &models {
        // tolerances come from the source model, so each cell of a row
        // judges the same adversarial inputs against the same κ
        let objs = natural_kappas(src, &split.test, &objectives, 0.25)?;
        let sweep = whitebox_sweep(src, src_name, &samples, &objs, &[0.45], &AttackConfig::default())?;
        for (rx_name, rx) in &models {
            matrix.entries.push(blackbox_transfer(&sweep, rx, rx_name)?);
        }
    }
    print!("{}", matrix.summary());
    Ok(())
}
