//! JSON checkpoints: `{format, version, architecture, params: [{name, shape, data}]}`.
//!
//! Floats are written in shortest round-trip form, so a reloaded model
//! predicts bit-identically.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ArchKind, Architecture, ParamSet, SequenceRegressor};
use crate::diffcore::NdArray;
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;
const FORMAT: &str = "aia-checkpoint";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NamedArray {
    name: String,
    #[serde(flatten)]
    value: NdArray,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointFile {
    format: String,
    version: u32,
    architecture: Architecture,
    params: Vec<NamedArray>,
}

pub fn save_model(model: &SequenceRegressor, path: &Path) -> Result<()> {
    let file = CheckpointFile {
        format: FORMAT.into(),
        version: CHECKPOINT_VERSION,
        architecture: model.architecture().clone(),
        params: model
            .params()
            .iter()
            .map(|(name, v)| NamedArray { name: name.to_string(), value: v.clone() })
            .collect(),
    };
    let mut text = serde_json::to_string(&file)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Load a checkpoint; with `expect = Some(kind)` a checkpoint of another
/// architecture is rejected.
pub fn load_model(path: &Path, expect: Option<ArchKind>) -> Result<SequenceRegressor> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: CheckpointFile =
        serde_json::from_str(&text).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
    if file.format != FORMAT {
        return Err(Error::Checkpoint(format!("unrecognised format tag '{}'", file.format)));
    }
    if file.version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "format version {} is not supported (expected {CHECKPOINT_VERSION})",
            file.version
        )));
    }
    if let Some(kind) = expect {
        if kind != file.architecture.kind() {
            return Err(Error::ArchitectureMismatch {
                expected: kind.to_string(),
                found: file.architecture.kind().to_string(),
            });
        }
    }
    let mut params = ParamSet::new();
    for p in file.params {
        if params.get(&p.name).is_some() {
            return Err(Error::Checkpoint(format!("duplicate parameter '{}'", p.name)));
        }
        params.insert(p.name, p.value);
    }
    SequenceRegressor::from_parts(file.architecture, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeldata::SkeletonSequence;

    fn input() -> SkeletonSequence {
        SkeletonSequence::new(2, (0..36).map(|i| (i as f64 * 0.37).sin().abs()).collect()).unwrap()
    }

    #[test]
    fn round_trip_predicts_bit_identically() {
        let dir = tempfile::tempdir().unwrap();
        for kind in [ArchKind::Tcn, ArchKind::Gru] {
            let m = SequenceRegressor::new(Architecture::tiny(kind, 6), 9).unwrap();
            let path = dir.path().join(format!("{kind}.json"));
            save_model(&m, &path).unwrap();
            let back = load_model(&path, Some(kind)).unwrap();
            assert_eq!(back, m);
            assert_eq!(back.predict(&input()).unwrap(), m.predict(&input()).unwrap());
        }
    }

    #[test]
    fn wrong_architecture_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tcn.json");
        let m = SequenceRegressor::new(Architecture::tiny(ArchKind::Tcn, 6), 0).unwrap();
        save_model(&m, &path).unwrap();
        assert!(matches!(load_model(&path, Some(ArchKind::Gru)), Err(Error::ArchitectureMismatch { .. })));
    }

    #[test]
    fn corrupted_files_give_structured_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let m = SequenceRegressor::new(Architecture::tiny(ArchKind::Gru, 6), 0).unwrap();
        save_model(&m, &path).unwrap();
        let good = fs::read_to_string(&path).unwrap();

        fs::write(&path, &good[..good.len() / 2]).unwrap();
        assert!(matches!(load_model(&path, None), Err(Error::Checkpoint(_))));

        fs::write(&path, good.replace("\"version\":1", "\"version\":7")).unwrap();
        assert!(matches!(load_model(&path, None), Err(Error::Checkpoint(_))));

        fs::write(&path, good.replace("head.bias", "head.offset")).unwrap();
        assert!(matches!(load_model(&path, None), Err(Error::Checkpoint(_))));

        assert!(matches!(load_model(&dir.path().join("absent.json"), None), Err(Error::Io { .. })));
    }
}
