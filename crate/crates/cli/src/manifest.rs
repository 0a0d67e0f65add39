//! Run manifests: config hash, stage timings, produced files with digests,
//! and verdict summary lines. `--check` and the `check` subcommand verify
//! the digests against the files on disk.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageTime {
    pub name: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub artifact_version: String,
    pub seed: u64,
    pub stages: Vec<StageTime>,
    pub files: Vec<FileEntry>,
    pub verdicts: Vec<String>,
}

/// Hash of the canonical (JSON) serialization of a config; stable across
/// platforms because field order is fixed by the struct definition.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let canonical = serde_json::to_string(config).expect("config serializes");
    hex_digest(canonical.as_bytes())
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects produced files and stage timings; all writes go through this
/// single collector so output never interleaves.
pub struct Collector {
    root: PathBuf,
    manifest: RunManifest,
    stage_start: Instant,
    stage_name: String,
}

impl Collector {
    pub fn new(root: &Path, config_hash: String, seed: u64) -> std::io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            manifest: RunManifest {
                config_hash,
                artifact_version: env!("CARGO_PKG_VERSION").to_string(),
                seed,
                stages: Vec::new(),
                files: Vec::new(),
                verdicts: Vec::new(),
            },
            stage_start: Instant::now(),
            stage_name: "setup".into(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config_hash(&self) -> &str {
        &self.manifest.config_hash
    }

    /// Close the current stage and open a new one.
    pub fn stage(&mut self, name: &str) {
        let elapsed = self.stage_start.elapsed().as_secs_f64();
        self.manifest.stages.push(StageTime { name: self.stage_name.clone(), seconds: elapsed });
        self.stage_name = name.to_string();
        self.stage_start = Instant::now();
    }

    pub fn verdict_line(&mut self, line: String) {
        self.manifest.verdicts.push(line);
    }

    /// Register a file written under the output root.
    pub fn record_file(&mut self, relative: &str) -> std::io::Result<()> {
        let path = self.root.join(relative);
        let bytes = fs::read(&path)?;
        self.manifest.files.push(FileEntry {
            path: relative.to_string(),
            sha256: hex_digest(&bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    /// Finish the last stage and write `manifest.json`.
    pub fn finish(mut self) -> std::io::Result<RunManifest> {
        let elapsed = self.stage_start.elapsed().as_secs_f64();
        self.manifest.stages.push(StageTime { name: self.stage_name.clone(), seconds: elapsed });
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        fs::write(self.root.join(MANIFEST_NAME), text)?;
        Ok(self.manifest)
    }
}

/// Verify every file listed in an output directory's manifest. Returns the
/// mismatched paths.
pub fn check_manifest(root: &Path) -> std::io::Result<(RunManifest, Vec<String>)> {
    let text = fs::read_to_string(root.join(MANIFEST_NAME))?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
    let mut mismatches = Vec::new();
    for entry in &manifest.files {
        let path = root.join(&entry.path);
        match fs::read(&path) {
            Ok(bytes) => {
                if hex_digest(&bytes) != entry.sha256 || bytes.len() as u64 != entry.bytes {
                    mismatches.push(entry.path.clone());
                }
            }
            Err(_) => mismatches.push(entry.path.clone()),
        }
    }
    Ok((manifest, mismatches))
}
