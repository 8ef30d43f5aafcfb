//! Targeted attacks on sequence regressors.
//!
//! Starting from the clean input `X`, the attack iterates
//! `X′ ← Π_{X,ε}(X′ − α·sign ∇L_adv)` where
//! `L_adv = Σ_t |‖f(x′₁..x′_t) − y′_t‖₂ − κ/T| + λ·L_temporal`.
//! An attack succeeds when `Σ_t ‖f(x′₁..x′_t) − y′_t‖₂ < κ`.

mod loss;
mod step;

use serde::{Deserialize, Serialize};

pub use loss::{
    adv_loss_on, distance_sum, spatial_loss, spatial_loss_node, temporal_loss, temporal_loss_node, AdvLossNodes,
};
pub use step::{pgd_step, project, PerturbationMask, UpdateRule};

use crate::diffcore::{adam_update, AdamHyper, AdamState, Graph, NdArray};
use crate::error::{Error, Result};
use crate::models::SequenceRegressor;
use crate::skeldata::{Interaction, InteractionRecord, SkeletonSequence};

/// Mean of the five surveyed tolerances, used when no κ is given.
pub const DEFAULT_KAPPA: f64 = 63.854;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttackConfig {
    /// ℓ∞ radius of the perturbation.
    pub epsilon: f64,
    /// Sign-step size.
    pub alpha: f64,
    pub steps: usize,
    /// Weight of the temporal coherence term, in `[0, 1]`.
    pub lambda: f64,
    /// Success tolerance on the summed frame distance.
    pub kappa: f64,
    pub mask: PerturbationMask,
    pub update_rule: UpdateRule,
    /// Return the first iterate that meets the tolerance instead of running
    /// all steps.
    pub stop_on_success: bool,
    /// Keep coordinates inside the SBU value ranges.
    pub clamp_domain: bool,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.45,
            alpha: 0.03,
            steps: 400,
            lambda: 0.1,
            kappa: DEFAULT_KAPPA,
            mask: PerturbationMask::Depth,
            update_rule: UpdateRule::Pgd,
            stop_on_success: true,
            clamp_domain: true,
        }
    }
}

impl AttackConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |r: String| Err(Error::Config(format!("attack: {r}")));
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return bad(format!("epsilon must be > 0, got {}", self.epsilon));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be > 0, got {}", self.alpha));
        }
        if self.steps == 0 {
            return bad("steps must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return bad(format!("lambda must lie in [0, 1], got {}", self.lambda));
        }
        if self.kappa.is_nan() || self.kappa < 0.0 {
            return bad(format!("kappa must be ≥ 0, got {}", self.kappa));
        }
        if let UpdateRule::Adam { learning_rate } = self.update_rule {
            if !(learning_rate > 0.0 && learning_rate.is_finite()) {
                return bad(format!("adam learning rate must be > 0, got {learning_rate}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackResult {
    /// The selected adversarial input `X′`.
    pub adversarial: SkeletonSequence,
    /// Model output on `X′`.
    pub output: SkeletonSequence,
    /// `L_adv` at every evaluated iterate, starting with `X′₀ = X`.
    pub loss_trace: Vec<f64>,
    /// `Σ_t ‖f(x′₁..x′_t) − y′_t‖₂` at every evaluated iterate.
    pub distance_trace: Vec<f64>,
    pub initial_distance: f64,
    /// Distance sum of the selected iterate.
    pub distance: f64,
    pub kappa: f64,
    pub success: bool,
    /// Index of the selected iterate in the traces.
    pub selected_step: usize,
    /// `max |X′ − X|` over all coordinates.
    pub max_perturbation: f64,
}

/// Run the attack; see [`run_attack_observed`].
pub fn run_attack(
    model: &SequenceRegressor,
    input: &SkeletonSequence,
    target: &SkeletonSequence,
    cfg: &AttackConfig,
) -> Result<AttackResult> {
    run_attack_observed(model, input, target, cfg, |_, _| {})
}

/// Run the attack, calling `observe(m, X′_m)` for every iterate that is
/// evaluated (including `X′₀ = X`).
///
/// With `stop_on_success` the first iterate whose distance sum falls below κ
/// is returned; otherwise, and when no iterate succeeds, the iterate with the
/// smallest distance sum (earliest on ties).
pub fn run_attack_observed(
    model: &SequenceRegressor,
    input: &SkeletonSequence,
    target: &SkeletonSequence,
    cfg: &AttackConfig,
    mut observe: impl FnMut(usize, &NdArray),
) -> Result<AttackResult> {
    cfg.validate()?;
    if input.dim() != model.input_dim() {
        return Err(Error::DimensionMismatch { expected: model.input_dim(), got: input.dim() });
    }
    if target.dim() != model.output_dim() {
        return Err(Error::DimensionMismatch { expected: model.output_dim(), got: target.dim() });
    }
    if target.frames() != input.frames() {
        return Err(Error::shape("attack", &[&[input.frames(), input.dim()], &[target.frames(), target.dim()]]));
    }
    let mask = cfg.mask.resolve(input.dim())?;
    let frames = input.frames();
    let eta = cfg.kappa / frames as f64;
    let original = input.to_ndarray();
    let target_arr = target.to_ndarray();

    let mut g = Graph::new();
    let bound = model.params().bind(&mut g, false);
    let base = g.len();

    if cfg.kappa.is_infinite() {
        // every output is within tolerance; X itself is the least perturbed solution
        observe(0, &original);
        let output = model.predict(input)?;
        let d = distance_sum(&output, target)?;
        return Ok(AttackResult {
            adversarial: input.clone(),
            output,
            loss_trace: Vec::new(),
            distance_trace: vec![d],
            initial_distance: d,
            distance: d,
            kappa: cfg.kappa,
            success: true,
            selected_step: 0,
            max_perturbation: 0.0,
        });
    }

    let mut current = original.clone();
    let mut adam = AdamState::new();
    let mut loss_trace = Vec::with_capacity(cfg.steps + 1);
    let mut distance_trace = Vec::with_capacity(cfg.steps + 1);
    let mut best: Option<(usize, f64, NdArray, NdArray)> = None;

    for m in 0..=cfg.steps {
        observe(m, &current);
        g.truncate(base);
        let nodes = adv_loss_on(&mut g, model, &bound, &current, &target_arr, eta, cfg.lambda)?;
        let loss = g.value(nodes.total).item().unwrap_or(f64::NAN);
        if !loss.is_finite() {
            return Err(Error::NonFinite { stage: "attack step", index: m, value: loss });
        }
        let output = g.value(nodes.output);
        let dist = row_distance_sum(output, &target_arr);
        loss_trace.push(loss);
        distance_trace.push(dist);

        if best.as_ref().is_none_or(|b| dist < b.1) {
            best = Some((m, dist, current.clone(), output.clone()));
        }
        if (cfg.stop_on_success && dist < cfg.kappa) || m == cfg.steps {
            if cfg.stop_on_success && dist < cfg.kappa {
                best = Some((m, dist, current.clone(), output.clone()));
            }
            break;
        }

        let mut grads = g.backward(nodes.total)?;
        let grad = grads.take(nodes.input).expect("input adjoint");
        current = match cfg.update_rule {
            UpdateRule::Pgd => pgd_step(&original, &current, &grad, cfg.alpha, cfg.epsilon, &mask, cfg.clamp_domain),
            UpdateRule::Adam { learning_rate } => {
                let mut moved = [current];
                adam_update(&mut moved, &[grad], &mut adam, &AdamHyper::with_lr(learning_rate))?;
                let [moved] = moved;
                project(&original, &moved, cfg.epsilon, &mask, cfg.clamp_domain)
            }
        };
    }

    let (selected_step, distance, x_adv, out) = best.expect("at least one iterate");
    let max_perturbation = x_adv.max_abs_diff(&original);
    Ok(AttackResult {
        adversarial: SkeletonSequence::from_ndarray(&x_adv)?,
        output: SkeletonSequence::from_ndarray(&out)?,
        initial_distance: distance_trace[0],
        loss_trace,
        distance_trace,
        distance,
        kappa: cfg.kappa,
        success: distance < cfg.kappa,
        selected_step,
        max_perturbation,
    })
}

fn row_distance_sum(output: &NdArray, target: &NdArray) -> f64 {
    (0..output.rows())
        .map(|t| output.row(t).iter().zip(target.row(t)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .sum()
}

/// Serialisable summary of one attack, with the adversarial input and the
/// model's response in the dataset interchange layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackRecord {
    pub config: AttackConfig,
    pub objective: Interaction,
    pub loss_trace: Vec<f64>,
    pub distance_trace: Vec<f64>,
    pub initial_distance: f64,
    pub distance: f64,
    pub kappa: f64,
    pub success: bool,
    pub selected_step: usize,
    pub max_perturbation: f64,
    /// `actor` is `X′`, `reactor` the predicted response to it.
    pub adversarial: InteractionRecord,
    pub clean_input: SkeletonSequence,
    pub target: SkeletonSequence,
}

impl AttackRecord {
    pub fn new(
        result: &AttackResult,
        cfg: &AttackConfig,
        objective: Interaction,
        set_id: &str,
        clean_input: &SkeletonSequence,
        target: &SkeletonSequence,
    ) -> Result<Self> {
        Ok(Self {
            config: cfg.clone(),
            objective,
            loss_trace: result.loss_trace.clone(),
            distance_trace: result.distance_trace.clone(),
            initial_distance: result.initial_distance,
            distance: result.distance,
            kappa: result.kappa,
            success: result.success,
            selected_step: result.selected_step,
            max_perturbation: result.max_perturbation,
            adversarial: InteractionRecord::new(objective, set_id, result.adversarial.clone(), result.output.clone())?,
            clean_input: clean_input.clone(),
            target: target.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ArchKind, Architecture};

    fn model(kind: ArchKind) -> SequenceRegressor {
        SequenceRegressor::new(Architecture::tiny(kind, 6), 7).unwrap()
    }

    fn input() -> SkeletonSequence {
        let data = (0..8 * 6)
            .map(|i| if i % 3 == 2 { 2.0 + 0.1 * (i as f64).sin() } else { 0.5 + 0.2 * (i as f64).cos() })
            .collect();
        SkeletonSequence::new(2, data).unwrap()
    }

    #[test]
    fn infinite_tolerance_always_succeeds() {
        let m = model(ArchKind::Tcn);
        let x = input();
        let y = x.clone();
        let cfg = AttackConfig { kappa: f64::INFINITY, ..Default::default() };
        let r = run_attack(&m, &x, &y, &cfg).unwrap();
        assert!(r.success);
        assert_eq!(r.adversarial, x);
    }

    #[test]
    fn natural_output_target_succeeds_at_step_zero() {
        let m = model(ArchKind::Gru);
        let x = input();
        let y = m.predict(&x).unwrap();
        let cfg = AttackConfig { kappa: 1e-9, ..Default::default() };
        let r = run_attack(&m, &x, &y, &cfg).unwrap();
        assert!(r.success);
        assert_eq!(r.selected_step, 0);
        assert_eq!(r.max_perturbation, 0.0);
    }

    #[test]
    fn constraints_hold_at_every_iterate() {
        let m = model(ArchKind::Tcn);
        let x = input();
        let y = SkeletonSequence::new(2, vec![0.9; 48]).unwrap();
        let cfg = AttackConfig { epsilon: 0.2, steps: 30, kappa: 0.0, ..Default::default() };
        let orig = x.to_ndarray();
        let mut seen = 0;
        run_attack_observed(&m, &x, &y, &cfg, |_, cur| {
            seen += 1;
            for (i, (a, b)) in cur.data().iter().zip(orig.data()).enumerate() {
                assert!((a - b).abs() <= 0.2);
                if i % 3 != 2 {
                    assert_eq!(a.to_bits(), b.to_bits());
                }
            }
        })
        .unwrap();
        assert_eq!(seen, 31);
    }

    #[test]
    fn mismatched_target_is_rejected() {
        let m = model(ArchKind::Tcn);
        let x = input();
        let y = x.prefix(3).unwrap();
        assert!(run_attack(&m, &x, &y, &AttackConfig::default()).is_err());
    }

    #[test]
    fn config_validation() {
        let ok = AttackConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            AttackConfig { lambda: 1.5, ..ok.clone() },
            AttackConfig { epsilon: 0.0, ..ok.clone() },
            AttackConfig { steps: 0, ..ok.clone() },
            AttackConfig { kappa: -1.0, ..ok.clone() },
            AttackConfig { update_rule: UpdateRule::Adam { learning_rate: 0.0 }, ..ok.clone() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn lambda_zero_allows_single_frame() {
        let m = model(ArchKind::Gru);
        let x = input().prefix(1).unwrap();
        let y = SkeletonSequence::new(2, vec![0.9; 6]).unwrap();
        let cfg = AttackConfig { lambda: 0.0, steps: 3, kappa: 0.0, ..Default::default() };
        assert!(run_attack(&m, &x, &y, &cfg).is_ok());
        let cfg = AttackConfig { lambda: 0.1, ..cfg };
        assert!(run_attack(&m, &x, &y, &cfg).is_err());
    }

    #[test]
    fn adam_rule_respects_constraints() {
        let m = model(ArchKind::Tcn);
        let x = input();
        let y = SkeletonSequence::new(2, vec![0.9; 48]).unwrap();
        let cfg = AttackConfig {
            epsilon: 0.01,
            steps: 50,
            kappa: 0.0,
            update_rule: UpdateRule::Adam { learning_rate: 1e-3 },
            stop_on_success: false,
            ..Default::default()
        };
        let r = run_attack(&m, &x, &y, &cfg).unwrap();
        assert!(r.max_perturbation <= 0.01);
        assert_eq!(r.loss_trace.len(), 51);
    }
}
