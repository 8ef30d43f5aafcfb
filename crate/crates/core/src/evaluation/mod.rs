//! Tolerance tables, white-box ε sweeps and black-box transfer.

mod report;
mod sweep;
mod tolerance;

pub use report::{SampleFlag, SuccessReport, SweepCell, TransferEntry, TransferMatrix};
pub use sweep::{
    blackbox_transfer, max_perturbation_jump, natural_distances, natural_kappas, sample_objectives, whitebox_sweep,
    AdversarialCase, Objective, WhiteboxSweep,
};
pub use tolerance::{percentile, resolve_kappa, ToleranceTable};

/// The ε values of the standard sweep.
pub const EPSILON_GRID: [f64; 6] = [0.075, 0.15, 0.225, 0.3, 0.375, 0.45];
