//! Run manifests: the resolved command configuration together with SHA-256
//! digests of every input and output file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::summary::{read_json, write_json};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self> {
        let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(Self {
            path: path.to_string_lossy().into_owned(),
            sha256: sha256_hex(&data),
            bytes: data.len() as u64,
        })
    }

    pub fn file_name(&self) -> String {
        Path::new(&self.path)
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    }

    /// Whether the file on disk still has this digest.
    pub fn matches_disk(&self) -> bool {
        FileDigest::of(Path::new(&self.path)).is_ok_and(|d| d.sha256 == self.sha256)
    }
}

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Fully resolved arguments of the command, seed override applied.
    pub config: serde_json::Value,
    pub seed: u64,
    pub code_version: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    pub fn new<C: Serialize>(command: &str, config: &C, seed: u64, inputs: &[PathBuf], outputs: &[PathBuf]) -> Result<Self> {
        let digests = |paths: &[PathBuf]| paths.iter().map(|p| FileDigest::of(p)).collect::<Result<Vec<_>>>();
        Ok(Self {
            command: command.into(),
            config: serde_json::to_value(config).map_err(|source| Error::Json { path: "config".into(), source })?,
            seed,
            code_version: env!("CARGO_PKG_VERSION").into(),
            inputs: digests(inputs)?,
            outputs: digests(outputs)?,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn read(path: &Path) -> Result<Self> {
        read_json(path)
    }

    /// Paths whose current contents no longer match the recorded digests.
    pub fn stale_files(&self) -> Vec<String> {
        self.inputs
            .iter()
            .chain(&self.outputs)
            .filter(|d| !d.matches_disk())
            .map(|d| d.path.clone())
            .collect()
    }
}

/// Outcome of re-running a manifest into a fresh directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub identical: Vec<String>,
    pub different: Vec<String>,
    /// Recorded inputs whose digest changed since the original run.
    pub changed_inputs: Vec<String>,
}

impl ReplayReport {
    pub fn reproduced(&self) -> bool {
        self.different.is_empty() && self.changed_inputs.is_empty()
    }

    pub(crate) fn compare(manifest: &RunManifest, out_dir: &Path) -> Result<Self> {
        let mut report = Self {
            identical: Vec::new(),
            different: Vec::new(),
            changed_inputs: manifest.inputs.iter().filter(|d| !d.matches_disk()).map(|d| d.path.clone()).collect(),
        };
        for d in &manifest.outputs {
            let name = d.file_name();
            let fresh = FileDigest::of(&out_dir.join(&name))?;
            if fresh.sha256 == d.sha256 {
                report.identical.push(name);
            } else {
                report.different.push(name);
            }
        }
        Ok(report)
    }
}
