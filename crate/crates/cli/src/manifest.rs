//! The run manifest emitted beside every artifact: configuration and input
//! digests, version, timings, and accumulated warnings. Timings vary run to
//! run; everything else is content-derived.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub toolkit_version: String,
    pub command: String,
    pub seed: u64,
    pub config_sha256: String,
    pub inputs: Vec<InputDigest>,
    #[serde(default)]
    pub outputs: Vec<InputDigest>,
    /// Hyperparameters chosen by cross-validation, keyed `h<horizon>/<family>`.
    #[serde(default)]
    pub selected_specs: BTreeMap<String, serde_json::Value>,
    pub timings_ms: BTreeMap<String, u64>,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub const SCHEMA_VERSION: u32 = 1;

    pub fn new(command: &str, seed: u64, config_json: &str) -> Self {
        RunManifest {
            schema_version: Self::SCHEMA_VERSION,
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            config_sha256: sha256_hex(config_json.as_bytes()),
            inputs: Vec::new(),
            outputs: Vec::new(),
            selected_specs: BTreeMap::new(),
            timings_ms: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    pub fn digest_input(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    /// Records the digest of a produced artifact (by name, not full path,
    /// so manifests from different output directories stay comparable).
    pub fn digest_output(&mut self, name: &str, contents: &[u8]) {
        self.outputs.push(InputDigest {
            path: name.to_string(),
            sha256: sha256_hex(contents),
        });
    }

    pub fn record_timing(&mut self, stage: &str, elapsed: std::time::Duration) {
        self.timings_ms
            .insert(stage.to_string(), elapsed.as_millis() as u64);
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifests serialize")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digests_are_content_hashes() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_records_inputs_and_warnings() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("x.csv");
        std::fs::write(&file, "a,b\n1,2\n").unwrap();
        let mut manifest = RunManifest::new("evaluate", 42, "{}");
        manifest.digest_input(&file).unwrap();
        manifest.warn("2 rows dropped");
        assert_eq!(manifest.inputs.len(), 1);
        assert_eq!(manifest.inputs[0].sha256.len(), 64);
        let json = manifest.to_json();
        assert!(json.contains("2 rows dropped"));
        assert!(json.contains("\"command\": \"evaluate\""));
    }
}
