//! Skeleton interaction data: SBU files, synthetic interactions, and the
//! input/target pairs the regressors train on.

mod sbu;
mod sequence;
mod split;
mod synth;

pub use sbu::{load_sbu_tree, parse_sbu, parse_sbu_file, write_sbu, ParseMode};
pub use sequence::{
    coord_bounds, Interaction, InteractionRecord, SkeletonSequence, COORDS, DEPTH_RANGE, SBU_JOINTS, XY_RANGE,
};
pub use split::{
    make_pairs, read_dataset, split_by_sets, write_dataset, DatasetSplit, SequencePair, DEFAULT_HELD_OUT,
    SYNTH_SET_ORDER,
};
pub use synth::{root_joint, synth_generate};
