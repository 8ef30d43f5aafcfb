use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::params::{uniform, Bound, ParamSet};
use crate::diffcore::{Graph, NdArray, NodeId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GruStage {
    pub layers: usize,
    pub hidden: usize,
}

/// Stacked gated-recurrent encoder followed by a per-frame linear head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GruConfig {
    pub input_dim: usize,
    pub output_dim: usize,
    pub stack: Vec<GruStage>,
}

impl GruConfig {
    pub fn new(input_dim: usize, output_dim: usize, stack: Vec<GruStage>) -> Self {
        Self { input_dim, output_dim, stack }
    }

    /// 2×512, 2×256, 1×128.
    pub fn full(dim: usize) -> Self {
        let s = |layers, hidden| GruStage { layers, hidden };
        Self::new(dim, dim, vec![s(2, 512), s(2, 256), s(1, 128)])
    }

    pub fn tiny(dim: usize) -> Self {
        Self::new(dim, dim, vec![GruStage { layers: 1, hidden: 32 }])
    }

    pub fn validate(&self) -> Result<()> {
        if self.stack.is_empty() {
            return Err(Error::Config("gru: stack must not be empty".into()));
        }
        if self.stack.iter().any(|s| s.layers == 0 || s.hidden == 0) {
            return Err(Error::Config("gru: every stage needs layers ≥ 1 and hidden ≥ 1".into()));
        }
        if self.input_dim == 0 || self.output_dim == 0 {
            return Err(Error::Config("gru: dimensions must be positive".into()));
        }
        Ok(())
    }

    /// `(name prefix, input width, hidden width)` for every recurrent layer.
    fn layers(&self) -> Vec<(String, usize, usize)> {
        let mut out = Vec::new();
        let mut width = self.input_dim;
        for (s, stage) in self.stack.iter().enumerate() {
            for l in 0..stage.layers {
                out.push((format!("gru{s}.{l}"), width, stage.hidden));
                width = stage.hidden;
            }
        }
        out
    }

    fn last_hidden(&self) -> usize {
        self.stack.last().map(|s| s.hidden).unwrap_or(0)
    }

    pub(crate) fn init(&self, rng: &mut ChaCha8Rng) -> ParamSet {
        let mut p = ParamSet::new();
        for (name, d_in, h) in self.layers() {
            let bound = 1.0 / (h as f64).sqrt();
            p.insert(format!("{name}.w_in"), uniform(rng, &[d_in, 3 * h], bound));
            p.insert(format!("{name}.w_hid"), uniform(rng, &[h, 3 * h], bound));
            p.insert(format!("{name}.b_in"), uniform(rng, &[3 * h], bound));
            p.insert(format!("{name}.b_hid"), uniform(rng, &[3 * h], bound));
        }
        let h = self.last_hidden();
        p.insert("head.weight", uniform(rng, &[h, self.output_dim], (3.0 / h as f64).sqrt()));
        p.insert("head.bias", NdArray::zeros(&[self.output_dim]));
        p
    }

    pub(crate) fn forward(&self, g: &mut Graph, p: &Bound<'_>, input: NodeId) -> Result<NodeId> {
        let frames = g.value(input).rows();
        let mut seq = input;
        for (name, _, h) in self.layers() {
            let w_in = p.id(&format!("{name}.w_in"))?;
            let w_hid = p.id(&format!("{name}.w_hid"))?;
            let b_in = p.id(&format!("{name}.b_in"))?;
            let b_hid = p.id(&format!("{name}.b_hid"))?;

            // input projections for all frames at once: [T × 3H]
            let xw = g.matmul(seq, w_in)?;
            let xw = g.add_row(xw, b_in)?;
            let mut state = g.constant(NdArray::zeros(&[1, h]));
            let mut outputs = Vec::with_capacity(frames);
            for t in 0..frames {
                let x_t = g.slice(xw, 0, t, t + 1)?;
                let hw = g.matmul(state, w_hid)?;
                let hw = g.add_row(hw, b_hid)?;

                let xr = g.slice(x_t, 1, 0, h)?;
                let hr = g.slice(hw, 1, 0, h)?;
                let r = g.add(xr, hr)?;
                let reset = g.sigmoid(r);

                let xz = g.slice(x_t, 1, h, 2 * h)?;
                let hz = g.slice(hw, 1, h, 2 * h)?;
                let z = g.add(xz, hz)?;
                let update = g.sigmoid(z);

                let xn = g.slice(x_t, 1, 2 * h, 3 * h)?;
                let hn = g.slice(hw, 1, 2 * h, 3 * h)?;
                let gated = g.mul(reset, hn)?;
                let n = g.add(xn, gated)?;
                let cand = g.tanh(n);

                // h' = (1 - z)·n + z·h = n + z·(h - n)
                let diff = g.sub(state, cand)?;
                let keep = g.mul(update, diff)?;
                state = g.add(cand, keep)?;
                outputs.push(state);
            }
            seq = g.concat(&outputs)?;
        }
        let out = g.matmul(seq, p.id("head.weight")?)?;
        g.add_row(out, p.id("head.bias")?)
    }
}
