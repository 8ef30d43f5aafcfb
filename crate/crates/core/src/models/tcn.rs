use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::params::{uniform, Bound, ParamSet};
use crate::diffcore::{Graph, NdArray, NodeId};
use crate::error::{Error, Result};

/// Stack of causal dilated convolutions with residual connections and a
/// per-frame linear head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TcnConfig {
    pub input_dim: usize,
    pub output_dim: usize,
    pub hidden_layers: usize,
    pub channels: usize,
    pub kernel_width: usize,
    /// One dilation per hidden layer.
    pub dilations: Vec<usize>,
}

impl TcnConfig {
    /// Kernel width 3 with dilation doubling per layer.
    pub fn new(input_dim: usize, output_dim: usize, hidden_layers: usize, channels: usize) -> Self {
        Self {
            input_dim,
            output_dim,
            hidden_layers,
            channels,
            kernel_width: 3,
            dilations: (0..hidden_layers).map(|l| 1usize << l.min(30)).collect(),
        }
    }

    /// 10 hidden layers of 256 channels.
    pub fn full(dim: usize) -> Self {
        Self::new(dim, dim, 10, 256)
    }

    pub fn tiny(dim: usize) -> Self {
        Self::new(dim, dim, 3, 32)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |r: &str| Err(Error::Config(format!("tcn: {r}")));
        if self.hidden_layers == 0 {
            return bad("hidden_layers must be at least 1");
        }
        if self.dilations.len() != self.hidden_layers {
            return bad("need one dilation per hidden layer");
        }
        if self.dilations.contains(&0) {
            return bad("dilations must be positive");
        }
        if self.channels == 0 || self.kernel_width == 0 || self.input_dim == 0 || self.output_dim == 0 {
            return bad("dimensions must be positive");
        }
        Ok(())
    }

    pub(crate) fn init(&self, rng: &mut ChaCha8Rng) -> ParamSet {
        let mut p = ParamSet::new();
        let c = self.channels;
        for l in 0..self.hidden_layers {
            let c_in = if l == 0 { self.input_dim } else { c };
            let bound = (3.0 / (self.kernel_width * c_in) as f64).sqrt();
            p.insert(format!("conv{l:02}.weight"), uniform(rng, &[self.kernel_width, c_in, c], bound));
            p.insert(format!("conv{l:02}.bias"), NdArray::zeros(&[c]));
        }
        if self.input_dim != c {
            p.insert("skip.weight", uniform(rng, &[self.input_dim, c], (3.0 / self.input_dim as f64).sqrt()));
        }
        p.insert("head.weight", uniform(rng, &[c, self.output_dim], (3.0 / c as f64).sqrt()));
        p.insert("head.bias", NdArray::zeros(&[self.output_dim]));
        p
    }

    pub(crate) fn forward(&self, g: &mut Graph, p: &Bound<'_>, input: NodeId) -> Result<NodeId> {
        let mut h = input;
        for (l, &dilation) in self.dilations.iter().enumerate() {
            let conv = g.causal_conv(h, p.id(&format!("conv{l:02}.weight"))?, dilation)?;
            let conv = g.add_row(conv, p.id(&format!("conv{l:02}.bias"))?)?;
            let act = g.relu(conv);
            let residual =
                if l == 0 && self.input_dim != self.channels { g.matmul(h, p.id("skip.weight")?)? } else { h };
            h = g.add(act, residual)?;
        }
        let out = g.matmul(h, p.id("head.weight")?)?;
        g.add_row(out, p.id("head.bias")?)
    }
}
