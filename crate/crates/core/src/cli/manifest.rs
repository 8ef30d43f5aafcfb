use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::Config;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const LOCK_FILE: &str = ".aia.lock";

/// Record of one command run, written next to its artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub config: Config,
    pub inputs: Vec<PathBuf>,
    /// Artifact file names relative to the output directory.
    pub outputs: Vec<String>,
    pub started_unix: u64,
    pub finished_unix: u64,
}

impl RunManifest {
    pub fn new(command: &str, config: &Config, inputs: Vec<PathBuf>) -> Self {
        Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            config: config.clone(),
            inputs,
            outputs: Vec::new(),
            started_unix: now(),
            finished_unix: 0,
        }
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Seconds since the epoch, or `SOURCE_DATE_EPOCH` when set so reruns can
/// reproduce the manifest byte for byte.
fn now() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.parse().ok()) {
        return t;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// An output directory held by this process. Artifacts are written through
/// it; the manifest is written by [`ArtifactDir::finish`] and the lock file
/// is removed on drop.
pub struct ArtifactDir {
    root: PathBuf,
    manifest: RunManifest,
}

impl ArtifactDir {
    pub fn open(root: &Path, manifest: RunManifest) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        let lock = root.join(LOCK_FILE);
        let mut f = OpenOptions::new().write(true).create_new(true).open(&lock).map_err(|e| {
            if e.kind() == std::io::ErrorKind::AlreadyExists {
                Error::Config(format!(
                    "{} is locked by another run (remove {} if no run is active)",
                    root.display(),
                    lock.display()
                ))
            } else {
                Error::io(&lock, e)
            }
        })?;
        let _ = writeln!(f, "{}", std::process::id());
        Ok(Self { root: root.to_path_buf(), manifest })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Path for a new artifact, recorded in the manifest.
    pub fn artifact(&mut self, name: &str) -> PathBuf {
        if !self.manifest.outputs.iter().any(|o| o == name) {
            self.manifest.outputs.push(name.to_string());
        }
        self.root.join(name)
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.artifact(name);
        let mut f = File::create(&path).map_err(|e| Error::io(&path, e))?;
        f.write_all(contents.as_bytes()).map_err(|e| Error::io(&path, e))
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn finish(mut self) -> Result<RunManifest> {
        self.manifest.finished_unix = now();
        let mut text = serde_json::to_string_pretty(&self.manifest)?;
        text.push('\n');
        let path = self.root.join(MANIFEST_FILE);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(self.manifest.clone())
    }
}

impl Drop for ArtifactDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(self.root.join(LOCK_FILE));
    }
}
