use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{SampleFlag, SuccessReport, TransferEntry};
use super::tolerance::{percentile, resolve_kappa, ToleranceTable};
use crate::attack::{distance_sum, run_attack, AttackConfig};
use crate::error::{Error, Result};
use crate::models::SequenceRegressor;
use crate::skeldata::{Interaction, SequencePair, SkeletonSequence};

/// A target reaction the attacker wants the model to produce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub label: Interaction,
    pub target: SkeletonSequence,
    pub kappa: f64,
    /// Index of the pair the target was taken from, if sampled.
    pub source_index: Option<usize>,
}

/// One objective per category present in `pool`, in class order. The
/// target is the `target` sequence of a pair of that category drawn with a
/// seeded generator; κ comes from `table`.
pub fn sample_objectives(pool: &[SequencePair], table: &ToleranceTable, seed: u64) -> Result<Vec<Objective>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for label in Interaction::ALL {
        let candidates: Vec<usize> = (0..pool.len()).filter(|&i| pool[i].category == label).collect();
        let Some(&pick) = candidates.choose(&mut rng) else { continue };
        out.push(Objective {
            label,
            target: pool[pick].target.clone(),
            kappa: resolve_kappa(table, label.label())?,
            source_index: Some(pick),
        });
    }
    if out.is_empty() {
        return Err(Error::Dataset("no pairs to draw objective targets from".into()));
    }
    Ok(out)
}

/// `Σ_t ‖f(x₁..x_t) − y′_t‖₂` for every clean input, with the target fitted
/// to each input's length.
pub fn natural_distances(
    model: &SequenceRegressor,
    samples: &[SequencePair],
    target: &SkeletonSequence,
) -> Result<Vec<f64>> {
    samples
        .par_iter()
        .map(|p| {
            let out = model.predict(&p.input)?;
            distance_sum(&out, &target.fit_length(p.input.frames())?)
        })
        .collect()
}

/// Replace each objective's κ by the `q`-quantile of its natural distance
/// sums over `samples` under `model`.
pub fn natural_kappas(
    model: &SequenceRegressor,
    samples: &[SequencePair],
    objectives: &[Objective],
    q: f64,
) -> Result<Vec<Objective>> {
    objectives
        .iter()
        .map(|o| {
            let d = natural_distances(model, samples, &o.target)?;
            Ok(Objective { kappa: percentile(&d, q)?, ..o.clone() })
        })
        .collect()
}

/// An adversarial input kept for reuse against other models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialCase {
    pub objective: usize,
    pub epsilon: usize,
    pub sample: usize,
    pub adversarial: SkeletonSequence,
    /// Objective target fitted to the sample's length.
    pub target: SkeletonSequence,
    pub kappa: f64,
    pub distance: f64,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhiteboxSweep {
    pub report: SuccessReport,
    pub objectives: Vec<Objective>,
    /// One case per (objective, ε, sample), in that nesting order.
    pub cases: Vec<AdversarialCase>,
}

fn check_grid(samples: usize, objectives: &[Objective], eps_grid: &[f64]) -> Result<()> {
    if samples == 0 {
        return Err(Error::Dataset("no samples to evaluate".into()));
    }
    if objectives.is_empty() {
        return Err(Error::Config("no objectives".into()));
    }
    if eps_grid.is_empty() {
        return Err(Error::Config("empty epsilon grid".into()));
    }
    Ok(())
}

/// Attack every sample toward every objective at every ε and aggregate the
/// success rates.
///
/// Cells are independent and run in parallel; results are merged by cell
/// index so the report does not depend on scheduling.
pub fn whitebox_sweep(
    model: &SequenceRegressor,
    model_id: &str,
    samples: &[SequencePair],
    objectives: &[Objective],
    eps_grid: &[f64],
    cfg: &AttackConfig,
) -> Result<WhiteboxSweep> {
    check_grid(samples.len(), objectives, eps_grid)?;
    let (n_e, n_s) = (eps_grid.len(), samples.len());
    let cases: Vec<AdversarialCase> = (0..objectives.len() * n_e * n_s)
        .into_par_iter()
        .map(|cell| {
            let (o, e, s) = (cell / (n_e * n_s), cell / n_s % n_e, cell % n_s);
            let obj = &objectives[o];
            let input = &samples[s].input;
            let target = obj.target.fit_length(input.frames())?;
            let c = AttackConfig { epsilon: eps_grid[e], kappa: obj.kappa, ..cfg.clone() };
            let r = run_attack(model, input, &target, &c)?;
            Ok(AdversarialCase {
                objective: o,
                epsilon: e,
                sample: s,
                adversarial: r.adversarial,
                target,
                kappa: obj.kappa,
                distance: r.distance,
                success: r.success,
            })
        })
        .collect::<Result<_>>()?;
    let flags = cases.iter().map(SampleFlag::from_case).collect();
    let report = SuccessReport::from_flags(model_id, objectives, eps_grid, n_s, flags)?;
    Ok(WhiteboxSweep { report, objectives: objectives.to_vec(), cases })
}

/// Judge the adversarial inputs of a white-box sweep under `receiver`: a
/// case succeeds when the receiver's own output is within the case's κ of
/// the target.
pub fn blackbox_transfer(
    sweep: &WhiteboxSweep,
    receiver: &SequenceRegressor,
    receiver_id: &str,
) -> Result<TransferEntry> {
    let src = &sweep.report;
    let flags: Vec<SampleFlag> = sweep
        .cases
        .par_iter()
        .map(|case| {
            if case.adversarial.dim() != receiver.input_dim() {
                return Err(Error::DimensionMismatch { expected: receiver.input_dim(), got: case.adversarial.dim() });
            }
            if case.target.dim() != receiver.output_dim() {
                return Err(Error::DimensionMismatch { expected: receiver.output_dim(), got: case.target.dim() });
            }
            let out = receiver.predict(&case.adversarial)?;
            let distance = distance_sum(&out, &case.target)?;
            Ok(SampleFlag {
                objective: case.objective,
                epsilon: case.epsilon,
                sample: case.sample,
                distance,
                success: distance < case.kappa,
            })
        })
        .collect::<Result<_>>()?;
    let report = SuccessReport::from_flags(receiver_id, &sweep.objectives, &src.epsilons, src.samples, flags)?;
    Ok(TransferEntry { source: src.model.clone(), receiver: receiver_id.to_string(), report })
}

/// `max_t ‖δ_t − δ_{t−1}‖∞` for the perturbation `δ = adversarial − clean`:
/// the largest jump of the perturbation between consecutive frames.
pub fn max_perturbation_jump(clean: &SkeletonSequence, adversarial: &SkeletonSequence) -> Result<f64> {
    if clean.frames() != adversarial.frames() || clean.dim() != adversarial.dim() {
        return Err(Error::shape(
            "perturbation-jump",
            &[&[clean.frames(), clean.dim()], &[adversarial.frames(), adversarial.dim()]],
        ));
    }
    let mut worst = 0.0_f64;
    for t in 1..clean.frames() {
        let (c0, c1) = (clean.frame(t - 1), clean.frame(t));
        let (a0, a1) = (adversarial.frame(t - 1), adversarial.frame(t));
        for k in 0..clean.dim() {
            let jump = ((a1[k] - c1[k]) - (a0[k] - c0[k])).abs();
            worst = worst.max(jump);
        }
    }
    Ok(worst)
}
