//! Reverse-mode differentiation over dense `f64` arrays.
//!
//! A [`Graph`] records operations as they are applied; values are computed
//! eagerly and [`Graph::backward`] sweeps the tape in reverse creation order,
//! so gradients are bit-reproducible. The op set is exactly what the
//! regressors and attack objectives need: elementwise arithmetic, matmul,
//! time-axis concat/slice, causal dilated convolution, a few activations,
//! and sum / L2-norm reductions.

mod array;
mod graph;
mod optim;

pub use array::NdArray;
pub use graph::{sign, Gradients, Graph, NodeId, Op, Unary};
pub use optim::{adam_update, AdamHyper, AdamState};
