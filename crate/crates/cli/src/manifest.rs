//! Run directories and their manifests.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.json";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedValue {
    pub seed: u64,
    pub value: f64,
}

/// Mean and sample standard deviation of one number per seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub per_seed: Vec<SeedValue>,
}

impl Summary {
    pub fn new(per_seed: Vec<SeedValue>) -> Self {
        let n = per_seed.len() as f64;
        let mean = per_seed.iter().map(|s| s.value).sum::<f64>() / n;
        let std = if per_seed.len() > 1 {
            (per_seed.iter().map(|s| (s.value - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std, per_seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    /// Files written by the run, relative to the run directory.
    pub paths: Vec<String>,
    pub summary: Option<Summary>,
}

/// A run directory being filled. Refuses to reuse a directory that already
/// holds a manifest unless `force` is set.
pub struct RunDir {
    root: PathBuf,
    written: Vec<String>,
}

impl RunDir {
    pub fn create(root: &Path, force: bool) -> Result<Self> {
        if root.join(MANIFEST_FILE).exists() && !force {
            return Err(CliError::Usage(format!(
                "{} already holds a finished run; pass --force or choose another --out",
                root.display()
            ))
            .into());
        }
        std::fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(rel.to_string());
        Ok(path)
    }

    /// Echoes the config, then writes the manifest last.
    pub fn finish(mut self, command: &str, cfg: &ExperimentConfig, summary: Option<Summary>) -> Result<RunManifest> {
        self.write(CONFIG_FILE, cfg.to_json()?.as_bytes())?;
        let manifest = RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: cfg.hash()?,
            seeds: cfg.seeds.clone(),
            paths: self.written.clone(),
            summary,
        };
        self.write(MANIFEST_FILE, serde_json::to_string_pretty(&manifest)?.as_bytes())?;
        Ok(manifest)
    }
}

pub fn seed_dir(seed: u64) -> String {
    format!("seed-{seed}")
}
