//! Causal sequence-to-sequence regressors.
//!
//! Both architectures map a `T × 3N` input to a `T × 3N` output where frame
//! `t` of the output depends only on input frames `1..=t`.

mod checkpoint;
mod gru;
mod params;
mod tcn;
mod train;

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use checkpoint::{load_model, save_model, CHECKPOINT_VERSION};
pub use gru::{GruConfig, GruStage};
pub use params::{Bound, ParamSet};
pub use tcn::TcnConfig;
pub use train::{mse, train, TrainConfig, TrainHistory};

use crate::diffcore::{Graph, NdArray, NodeId};
use crate::error::{Error, Result};
use crate::skeldata::SkeletonSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArchKind {
    Tcn,
    Gru,
}

impl fmt::Display for ArchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArchKind::Tcn => "tcn",
            ArchKind::Gru => "gru",
        })
    }
}

impl std::str::FromStr for ArchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tcn" => Ok(ArchKind::Tcn),
            "gru" | "deepgru" => Ok(ArchKind::Gru),
            other => Err(Error::Config(format!("unknown model '{other}' (expected tcn or gru)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Architecture {
    Tcn(TcnConfig),
    Gru(GruConfig),
}

impl Architecture {
    pub fn kind(&self) -> ArchKind {
        match self {
            Architecture::Tcn(_) => ArchKind::Tcn,
            Architecture::Gru(_) => ArchKind::Gru,
        }
    }

    pub fn tiny(kind: ArchKind, dim: usize) -> Self {
        match kind {
            ArchKind::Tcn => Architecture::Tcn(TcnConfig::tiny(dim)),
            ArchKind::Gru => Architecture::Gru(GruConfig::tiny(dim)),
        }
    }

    pub fn full(kind: ArchKind, dim: usize) -> Self {
        match kind {
            ArchKind::Tcn => Architecture::Tcn(TcnConfig::full(dim)),
            ArchKind::Gru => Architecture::Gru(GruConfig::full(dim)),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Architecture::Tcn(c) => c.input_dim,
            Architecture::Gru(c) => c.input_dim,
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Architecture::Tcn(c) => c.output_dim,
            Architecture::Gru(c) => c.output_dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Architecture::Tcn(c) => c.validate(),
            Architecture::Gru(c) => c.validate(),
        }
    }

    fn init(&self, seed: u64) -> ParamSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self {
            Architecture::Tcn(c) => c.init(&mut rng),
            Architecture::Gru(c) => c.init(&mut rng),
        }
    }
}

/// A causal model `f(x₁, …, x_t) = y_t` together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceRegressor {
    arch: Architecture,
    params: ParamSet,
}

impl SequenceRegressor {
    /// Fresh model with seeded initial weights.
    pub fn new(arch: Architecture, seed: u64) -> Result<Self> {
        arch.validate()?;
        let params = arch.init(seed);
        Ok(Self { arch, params })
    }

    pub(crate) fn from_parts(arch: Architecture, params: ParamSet) -> Result<Self> {
        arch.validate()?;
        let reference = arch.init(0);
        if reference.names() != params.names() {
            return Err(Error::Checkpoint(format!(
                "parameter names {:?} do not match architecture ({:?})",
                params.names(),
                reference.names()
            )));
        }
        for ((name, want), got) in reference.iter().zip(params.values()) {
            if want.shape() != got.shape() {
                return Err(Error::Checkpoint(format!(
                    "parameter '{name}' has shape {:?}, expected {:?}",
                    got.shape(),
                    want.shape()
                )));
            }
            if !got.is_finite() {
                return Err(Error::Checkpoint(format!("parameter '{name}' holds non-finite values")));
            }
        }
        Ok(Self { arch, params })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn kind(&self) -> ArchKind {
        self.arch.kind()
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    pub fn input_dim(&self) -> usize {
        self.arch.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.arch.output_dim()
    }

    /// Record the forward pass of `input` (a `T × input_dim` node) on `g`.
    pub fn forward(&self, g: &mut Graph, params: &Bound<'_>, input: NodeId) -> Result<NodeId> {
        let shape = g.value(input).shape();
        if shape.len() != 2 || shape[1] != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: shape.get(1).copied().unwrap_or(0),
            });
        }
        match &self.arch {
            Architecture::Tcn(c) => c.forward(g, params, input),
            Architecture::Gru(c) => c.forward(g, params, input),
        }
    }

    pub fn predict_array(&self, input: &NdArray) -> Result<NdArray> {
        let mut g = Graph::new();
        let bound = self.params.bind(&mut g, false);
        let x = g.constant(input.clone());
        let y = self.forward(&mut g, &bound, x)?;
        Ok(g.value(y).clone())
    }

    pub fn predict(&self, input: &SkeletonSequence) -> Result<SkeletonSequence> {
        if input.dim() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), got: input.dim() });
        }
        SkeletonSequence::from_ndarray(&self.predict_array(&input.to_ndarray())?)
    }
}
