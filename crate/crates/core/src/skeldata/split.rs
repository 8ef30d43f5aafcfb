use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::sequence::{Interaction, InteractionRecord, SkeletonSequence};
use crate::error::{Error, Result};

/// Sets held out for testing in the standard protocol.
pub const DEFAULT_HELD_OUT: [&str; 4] = ["s01s02", "s03s04", "s05s02", "s06s04"];

/// The 21 SBU set ids, ordered so the held-out sets sit at every fifth
/// position. Synthetic records cycle through this list.
pub const SYNTH_SET_ORDER: [&str; 21] = [
    "s01s02", "s01s03", "s01s07", "s02s01", "s02s03", "s03s04", "s02s06", "s02s07", "s03s02", "s03s05", "s05s02",
    "s03s06", "s04s02", "s04s03", "s04s06", "s06s04", "s05s03", "s06s02", "s06s03", "s07s01", "s07s03",
];

/// An input sequence and the sequence the model should produce from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequencePair {
    pub input: SkeletonSequence,
    pub target: SkeletonSequence,
    pub category: Interaction,
    pub set_id: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetSplit {
    pub train: Vec<SequencePair>,
    pub test: Vec<SequencePair>,
}

/// Both directions of an interaction: `(actor → reactor)` and
/// `(reactor → actor)`.
pub fn make_pairs(record: &InteractionRecord) -> [SequencePair; 2] {
    let pair = |input: &SkeletonSequence, target: &SkeletonSequence| SequencePair {
        input: input.clone(),
        target: target.clone(),
        category: record.category,
        set_id: record.set_id.clone(),
    };
    [pair(&record.actor, &record.reactor), pair(&record.reactor, &record.actor)]
}

pub fn split_by_sets<S: AsRef<str>>(records: &[InteractionRecord], held_out: &[S]) -> Result<DatasetSplit> {
    let held: BTreeSet<&str> = held_out.iter().map(AsRef::as_ref).collect();
    let mut split = DatasetSplit::default();
    for r in records {
        let bucket = if held.contains(r.set_id.as_str()) { &mut split.test } else { &mut split.train };
        bucket.extend(make_pairs(r));
    }
    if split.train.is_empty() {
        return Err(Error::Dataset("train partition is empty".into()));
    }
    if split.test.is_empty() {
        return Err(Error::Dataset("test partition is empty".into()));
    }
    Ok(split)
}

/// Read a JSON array of interchange records.
pub fn read_dataset(path: &Path) -> Result<Vec<InteractionRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let records: Vec<InteractionRecord> = serde_json::from_str(&text)?;
    Ok(records)
}

pub fn write_dataset(path: &Path, records: &[InteractionRecord]) -> Result<()> {
    let mut text = serde_json::to_string(records)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
