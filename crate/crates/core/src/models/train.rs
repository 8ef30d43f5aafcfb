use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SequenceRegressor;
use crate::diffcore::{adam_update, AdamHyper, AdamState, Graph, NdArray};
use crate::error::{Error, Result};
use crate::skeldata::SequencePair;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Pairs per optimizer step; `None` trains full-batch.
    pub batch_size: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 1000, learning_rate: 1e-3, seed: 0, batch_size: None }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if self.batch_size == Some(0) {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    /// Mean per-frame MSE seen during each epoch (before that epoch's updates).
    pub epoch_loss: Vec<f64>,
    /// Mean per-frame MSE over all pairs after the last update.
    pub final_loss: f64,
}

impl TrainHistory {
    /// Final loss relative to the loss of the initial model.
    pub fn relative_final_loss(&self) -> f64 {
        self.final_loss / self.epoch_loss[0]
    }
}

fn pair_loss_and_grads(model: &SequenceRegressor, pair: &SequencePair) -> Result<(f64, Vec<NdArray>)> {
    let mut g = Graph::new();
    let bound = model.params().bind(&mut g, true);
    let x = g.constant(pair.input.to_ndarray());
    let y = g.constant(pair.target.to_ndarray());
    let pred = model.forward(&mut g, &bound, x)?;
    if g.value(pred).shape() != g.value(y).shape() {
        return Err(Error::DimensionMismatch { expected: g.value(pred).cols(), got: g.value(y).cols() });
    }
    let diff = g.sub(pred, y)?;
    let sq = g.mul(diff, diff)?;
    let total = g.sum(sq);
    let n = g.value(diff).len() as f64;
    let loss = g.scale(total, 1.0 / n);
    let mut grads = g.backward(loss)?;
    let value = g.value(loss).item().unwrap_or(f64::NAN);
    let param_grads = bound.ids().iter().map(|&id| grads.take(id).expect("parameter adjoint")).collect();
    Ok((value, param_grads))
}

/// Mean per-frame squared error of `model` over `pairs`.
pub fn mse(model: &SequenceRegressor, pairs: &[SequencePair]) -> Result<f64> {
    let per_pair: Vec<f64> = pairs
        .par_iter()
        .map(|p| {
            let pred = model.predict(&p.input)?;
            if pred.data().len() != p.target.data().len() {
                return Err(Error::DimensionMismatch { expected: pred.dim(), got: p.target.dim() });
            }
            let se: f64 = pred.data().iter().zip(p.target.data()).map(|(a, b)| (a - b) * (a - b)).sum();
            Ok(se / pred.data().len() as f64)
        })
        .collect::<Result<_>>()?;
    Ok(per_pair.iter().sum::<f64>() / pairs.len() as f64)
}

/// Fit `model` to `pairs` by Adam on the per-frame mean squared error.
///
/// Per-pair gradients are computed in parallel and summed in pair order,
/// so the result is independent of thread scheduling.
pub fn train(
    mut model: SequenceRegressor,
    pairs: &[SequencePair],
    cfg: &TrainConfig,
) -> Result<(SequenceRegressor, TrainHistory)> {
    cfg.validate()?;
    if pairs.is_empty() {
        return Err(Error::Dataset("no training pairs".into()));
    }
    let hyper = AdamHyper::with_lr(cfg.learning_rate);
    let mut state = AdamState::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let batch = cfg.batch_size.unwrap_or(pairs.len()).min(pairs.len());
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        if batch < pairs.len() {
            order.shuffle(&mut rng);
        }
        let mut loss_sum = 0.0;
        for chunk in order.chunks(batch) {
            let results: Vec<(f64, Vec<NdArray>)> =
                chunk.par_iter().map(|&i| pair_loss_and_grads(&model, &pairs[i])).collect::<Result<_>>()?;
            let scale = 1.0 / chunk.len() as f64;
            let mut grads: Vec<NdArray> = model.params().values().iter().map(|v| NdArray::zeros(v.shape())).collect();
            for (loss, g) in &results {
                loss_sum += loss;
                for (acc, gi) in grads.iter_mut().zip(g) {
                    acc.add_scaled(gi, scale);
                }
            }
            adam_update(model.params_mut().values_mut(), &grads, &mut state, &hyper)?;
        }
        let mean = loss_sum / pairs.len() as f64;
        if !mean.is_finite() {
            return Err(Error::NonFinite { stage: "epoch", index: epoch, value: mean });
        }
        epoch_loss.push(mean);
    }

    let final_loss = mse(&model, pairs)?;
    if !final_loss.is_finite() {
        return Err(Error::NonFinite { stage: "epoch", index: cfg.epochs, value: final_loss });
    }
    Ok((model, TrainHistory { epoch_loss, final_loss }))
}
