//! Run manifests: what was run, with which seed, and digests of every output.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    /// Arguments after the program name.
    pub command: Vec<String>,
    pub config: serde_json::Value,
    pub seed: u64,
    pub started: DateTime<Utc>,
    pub finished: DateTime<Utc>,
    /// File name relative to the manifest directory, to lowercase hex SHA-256.
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_file(path: impl AsRef<Path>) -> Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

impl RunManifest {
    pub fn new(command: Vec<String>, config: serde_json::Value, seed: u64, started: DateTime<Utc>) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            config,
            seed,
            started,
            finished: started,
            outputs: BTreeMap::new(),
        }
    }

    /// Digests `names` inside `dir` and stamps the finish time.
    pub fn record_outputs(&mut self, dir: &Path, names: &[String]) -> Result<()> {
        for name in names {
            self.outputs.insert(name.clone(), sha256_file(dir.join(name))?);
        }
        self.finished = Utc::now();
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Output files in `dir` whose current digest differs from the recorded one.
    pub fn mismatches(&self, dir: &Path) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for (name, digest) in &self.outputs {
            let p = dir.join(name);
            if !p.exists() || &sha256_file(&p)? != digest {
                bad.push(name.clone());
            }
        }
        Ok(bad)
    }
}
