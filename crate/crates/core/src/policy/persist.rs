//! JSON persistence for trained policies and static gain sets.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::control::PidGainSet;
use crate::error::{Error, Result};

use super::agent::{AgentKind, PolicyParams};
use super::mlp::MlpLayout;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyMetadata {
    pub seed: Option<u64>,
    pub scenario: String,
    pub content_hash: String,
}

/// On-disk policy document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyFile {
    pub kind: AgentKind,
    pub layout: MlpLayout,
    pub params: Vec<f64>,
    pub metadata: PolicyMetadata,
}

/// SHA-256 over a `blob <len>\0` header and the little-endian parameter bytes.
pub fn content_hash(params: &[f64]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", params.len() * 8).as_bytes());
    for v in params {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

impl PolicyFile {
    pub fn new(policy: &PolicyParams, seed: Option<u64>, scenario: impl Into<String>) -> Self {
        Self {
            kind: policy.kind,
            layout: policy.layout.clone(),
            params: policy.params.clone(),
            metadata: PolicyMetadata {
                seed,
                scenario: scenario.into(),
                content_hash: content_hash(&policy.params),
            },
        }
    }

    /// Validates the shape and the content hash.
    pub fn into_policy(self) -> Result<PolicyParams> {
        let hash = content_hash(&self.params);
        if hash != self.metadata.content_hash {
            return Err(Error::Config(format!(
                "policy content hash mismatch: file says {}, parameters hash to {hash}",
                self.metadata.content_hash
            )));
        }
        PolicyParams::new(self.kind, self.layout, self.params)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Flattens a policy for the optimizer.
pub fn pack(p: &PolicyParams) -> Vec<f64> {
    p.params.clone()
}

/// Rebuilds a policy from an optimizer vector.
pub fn unpack(kind: AgentKind, layout: &MlpLayout, flat: &[f64]) -> Result<PolicyParams> {
    PolicyParams::new(kind, layout.clone(), flat.to_vec())
}

/// On-disk static gain document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainFile {
    pub gains: PidGainSet,
    /// Where the gains came from, e.g. `differential-evolution` or `reference`.
    pub source: String,
    #[serde(default)]
    pub fitness: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl GainFile {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
