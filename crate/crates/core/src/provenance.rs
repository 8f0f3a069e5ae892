//! Provenance stamps written next to every stage output.
//!
//! A stamp records the sha256 of each input and output file, the effective
//! configuration and the seed. Wall-clock data lives only in `timing`, so two
//! runs with the same inputs produce stamps that differ in that field alone.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const STAMP_SUFFIX: &str = ".stamp.json";

#[derive(Debug, Error)]
pub enum ProvenanceError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{artifact} is stale: {reason}")]
    Stale { artifact: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stamp {
    pub stage: String,
    /// Workdir-relative path to sha256 hex.
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub config: BTreeMap<String, String>,
    pub seed: u64,
    pub timing: Timing,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String, ProvenanceError> {
    let bytes = fs::read(path).map_err(|source| ProvenanceError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(sha256_hex(&bytes))
}

/// Hashes each workdir-relative path.
pub fn hash_files(workdir: &Path, paths: &[String]) -> Result<BTreeMap<String, String>, ProvenanceError> {
    paths
        .iter()
        .map(|p| Ok((p.clone(), sha256_file(&workdir.join(p))?)))
        .collect()
}

pub fn stamp_path(workdir: &Path, stage: &str) -> PathBuf {
    workdir.join(format!("{stage}{STAMP_SUFFIX}"))
}

impl Stamp {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("stamp serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, workdir: &Path) -> Result<(), ProvenanceError> {
        let path = stamp_path(workdir, &self.stage);
        fs::write(&path, self.to_json()).map_err(|source| ProvenanceError::Io { path, source })
    }

    pub fn read(path: &Path) -> Result<Self, ProvenanceError> {
        let text = fs::read_to_string(path).map_err(|source| ProvenanceError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ProvenanceError::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Every stamp in `workdir`, keyed by stage.
pub fn read_stamps(workdir: &Path) -> Result<BTreeMap<String, Stamp>, ProvenanceError> {
    let mut out = BTreeMap::new();
    let dir = fs::read_dir(workdir).map_err(|source| ProvenanceError::Io {
        path: workdir.to_path_buf(),
        source,
    })?;
    for entry in dir.flatten() {
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.ends_with(STAMP_SUFFIX) {
            let stamp = Stamp::read(&entry.path())?;
            out.insert(stamp.stage.clone(), stamp);
        }
    }
    Ok(out)
}

/// The stamp whose outputs include `artifact`.
pub fn producer<'a>(stamps: &'a BTreeMap<String, Stamp>, artifact: &str) -> Option<&'a Stamp> {
    stamps.values().find(|s| s.outputs.contains_key(artifact))
}

/// Fails when `artifact` changed since its stage wrote it, or when any input
/// of that stage changed since. Files without a producing stamp pass.
pub fn check_fresh(workdir: &Path, stamps: &BTreeMap<String, Stamp>, artifact: &str) -> Result<(), ProvenanceError> {
    let Some(stamp) = producer(stamps, artifact) else {
        return Ok(());
    };
    let stale = |reason: String| ProvenanceError::Stale {
        artifact: artifact.to_string(),
        reason,
    };
    let current = |p: &str| sha256_file(&workdir.join(p)).ok();
    if current(artifact).as_deref() != Some(stamp.outputs[artifact].as_str()) {
        return Err(stale(format!("modified after {} wrote it", stamp.stage)));
    }
    for (input, hash) in &stamp.inputs {
        if current(input).as_deref() != Some(hash.as_str()) {
            return Err(stale(format!("{input} changed after {} ran; rerun it", stamp.stage)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_upstream_change() {
        let dir = tempfile::tempdir().unwrap();
        let w = dir.path();
        fs::write(w.join("in.txt"), "a").unwrap();
        fs::write(w.join("out.txt"), "b").unwrap();
        let stamp = Stamp {
            stage: "s".into(),
            inputs: hash_files(w, &["in.txt".into()]).unwrap(),
            outputs: hash_files(w, &["out.txt".into()]).unwrap(),
            config: BTreeMap::new(),
            seed: 1,
            timing: Timing { elapsed_ms: 3 },
        };
        stamp.write(w).unwrap();
        let stamps = read_stamps(w).unwrap();
        assert_eq!(stamps["s"], stamp);
        check_fresh(w, &stamps, "out.txt").unwrap();
        check_fresh(w, &stamps, "in.txt").unwrap();
        fs::write(w.join("in.txt"), "changed").unwrap();
        assert!(matches!(check_fresh(w, &stamps, "out.txt"), Err(ProvenanceError::Stale { .. })));
    }
}
