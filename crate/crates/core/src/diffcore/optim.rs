use serde::{Deserialize, Serialize};

use super::array::NdArray;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamHyper {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamHyper {
    pub fn with_lr(learning_rate: f64) -> Self {
        Self { learning_rate, ..Self::default() }
    }
}

impl Default for AdamHyper {
    fn default() -> Self {
        Self { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// First/second moment estimates, one pair per parameter array.
#[derive(Debug, Clone, Default)]
pub struct AdamState {
    pub step: u64,
    first: Vec<NdArray>,
    second: Vec<NdArray>,
}

impl AdamState {
    pub fn new() -> Self {
        Self::default()
    }
}

/// One bias-corrected Adam step over `params`, in place.
pub fn adam_update(params: &mut [NdArray], grads: &[NdArray], state: &mut AdamState, hp: &AdamHyper) -> Result<()> {
    if params.len() != grads.len() {
        return Err(Error::invalid("adam", format!("{} params vs {} grads", params.len(), grads.len())));
    }
    for (p, g) in params.iter().zip(grads) {
        if p.shape() != g.shape() {
            return Err(Error::shape("adam", &[p.shape(), g.shape()]));
        }
    }
    if state.first.is_empty() {
        state.first = params.iter().map(|p| NdArray::zeros(p.shape())).collect();
        state.second = state.first.clone();
    } else if state.first.len() != params.len()
        || state.first.iter().zip(params.iter()).any(|(m, p)| m.shape() != p.shape())
    {
        return Err(Error::invalid("adam", "optimizer state does not match parameters"));
    }

    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - hp.beta1.powi(t);
    let c2 = 1.0 - hp.beta2.powi(t);
    for ((p, g), (m, v)) in params.iter_mut().zip(grads).zip(state.first.iter_mut().zip(state.second.iter_mut())) {
        let it = p.data_mut().iter_mut().zip(g.data()).zip(m.data_mut().iter_mut().zip(v.data_mut()));
        for ((pv, &gv), (mv, vv)) in it {
            *mv = hp.beta1 * *mv + (1.0 - hp.beta1) * gv;
            *vv = hp.beta2 * *vv + (1.0 - hp.beta2) * gv * gv;
            let m_hat = *mv / c1;
            let v_hat = *vv / c2;
            *pv -= hp.learning_rate * m_hat / (v_hat.sqrt() + hp.epsilon);
        }
    }
    Ok(())
}
