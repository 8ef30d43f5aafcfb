//! Targeted adversarial attacks on causal skeleton-sequence regressors.
//!
//! The crate trains regressors that map an actor's skeleton sequence to the
//! reactor's response, then searches for small, depth-only perturbations of
//! the actor's motion that steer the whole predicted response toward an
//! attacker-chosen reaction.
//!
//! - [`diffcore`]: reverse-mode autodiff and Adam
//! - [`skeldata`]: SBU-format loading, synthetic interactions, train/test pairs
//! - [`models`]: causal TCN and stacked-GRU regressors, training, checkpoints
//! - [`attack`]: sphere/temporal losses and the projected sign-gradient loop
//! - [`evaluation`]: tolerance tables, white-box sweeps, transfer matrices
//! - [`cli`]: the `aia` command-line front end

pub mod attack;
pub mod cli;
pub mod diffcore;
pub mod evaluation;
pub mod models;
pub mod skeldata;

mod error;

pub use error::{Error, Result};
