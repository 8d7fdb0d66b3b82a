//! Run manifests: what was run, with which settings, and what it wrote.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_SCHEMA: &str = "tiltrotor-manifest/1";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Contains no wall-clock data, so identical runs give identical bytes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    /// The effective configuration after flag overrides.
    pub config: serde_json::Value,
    pub config_sha256: String,
    /// Simulated or evaluated time span, where meaningful [s].
    pub time_span: Option<[f64; 2]>,
    pub outputs: Vec<OutputEntry>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, config: serde_json::Value) -> Self {
        let canonical = serde_json::to_vec(&config).expect("JSON values serialize");
        Self {
            schema: MANIFEST_SCHEMA.into(),
            command: command.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            seed,
            config_sha256: sha256_hex(&canonical),
            config,
            time_span: None,
            outputs: Vec::new(),
        }
    }

    /// Records an output; a repeated path replaces the earlier entry.
    pub fn add_output(&mut self, path: &str, content: &[u8]) {
        self.outputs.retain(|o| o.path != path);
        self.outputs.push(OutputEntry { path: path.into(), sha256: sha256_hex(content), bytes: content.len() });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}
