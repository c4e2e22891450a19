//! Experiment configuration: defaults, JSON file, then command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use cirl_core::control::GainProbe;
use cirl_core::optimize::{DeConfig, SwarmConfig};
use cirl_core::policy::AgentKind;
use cirl_core::scenarios::{self, Scenario, ScenarioSet};
use cirl_core::sim::{EnvConfig, NoiseConfig, RewardWeights};

use crate::error::CliError;

/// Environment variable naming the default output root.
pub const OUT_DIR_ENV: &str = "CIRL_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Built-in scenario id or path to a scenario JSON file.
    pub scenario: String,
    pub agent: AgentKind,
    pub seeds: Vec<u64>,
    pub swarm: SwarmConfig,
    pub de: DeConfig,
    /// Episodes averaged per static-PID fitness evaluation.
    pub de_episodes: usize,
    /// Replaces the noise of every scenario when set.
    pub noise: Option<NoiseConfig>,
    /// Replaces the reward weights of every scenario when set.
    pub weights: Option<RewardWeights>,
    pub env: EnvConfig,
    pub rga: GainProbe,
    /// Fill the wall_time_s learning-curve column. Off by default because it
    /// makes the CSV differ from run to run.
    pub record_wall_time: bool,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: "training".into(),
            agent: AgentKind::Cirl,
            seeds: (0..10).collect(),
            swarm: SwarmConfig::default(),
            de: DeConfig::default(),
            de_episodes: 3,
            noise: None,
            weights: None,
            env: EnvConfig::default(),
            rga: GainProbe::default(),
            record_wall_time: false,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())).into())
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(CliError::Usage("seed list is empty".into()).into());
        }
        if self.de_episodes == 0 {
            return Err(CliError::Usage("de_episodes must be at least 1".into()).into());
        }
        self.swarm
            .validate()
            .map_err(|e| CliError::Usage(format!("swarm: {e}")))?;
        Ok(())
    }

    /// Pretty JSON echo written into every run directory.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// SHA-256 of the compact JSON form with the output location removed, so
    /// the same experiment hashes the same wherever it is written.
    pub fn hash(&self) -> Result<String> {
        let mut c = self.clone();
        c.out = None;
        Ok(hex::encode(Sha256::digest(serde_json::to_vec(&c)?)))
    }

    /// The scenario set with any noise and weight overrides applied.
    pub fn scenario_set(&self) -> Result<ScenarioSet> {
        let mut set = resolve_scenario(&self.scenario)?;
        if let Some(noise) = self.noise {
            set = set.map(|s| s.with_noise(noise));
        }
        if let Some(w) = self.weights {
            set = set.map(|s| s.with_weights(w));
        }
        set.validate()
            .map_err(|e| CliError::Usage(format!("scenario '{}': {e}", self.scenario)))?;
        Ok(set)
    }
}

/// Built-in id, or a JSON file holding either a scenario set or one scenario.
pub fn resolve_scenario(spec: &str) -> Result<ScenarioSet> {
    if let Some(set) = scenarios::builtin(spec) {
        return Ok(set);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "unknown scenario '{spec}': not a file and not one of {}",
            scenarios::BUILTIN_IDS.join(", ")
        ))
        .into());
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading scenario {spec}"))?;
    if let Ok(set) = serde_json::from_str::<ScenarioSet>(&text) {
        return Ok(set);
    }
    let one = Scenario::from_json(&text).map_err(|e| CliError::Data(format!("scenario file {spec}: {e}")))?;
    Ok(ScenarioSet::single(one))
}

/// Accepts `a..b` (inclusive), `a..=b`, comma lists and single seeds.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, String> {
    let text = text.trim();
    let num = |s: &str| s.trim().parse::<u64>().map_err(|_| format!("invalid seed '{s}'"));
    if let Some((a, b)) = text.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return Err(format!("empty seed range {text}"));
        }
        return Ok((a..=b).collect());
    }
    let seeds = text.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
    if seeds.is_empty() {
        return Err("no seeds given".into());
    }
    Ok(seeds)
}

/// Output root: `$CIRL_OUT_DIR` if set, else `runs`.
pub fn default_out_root() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}
