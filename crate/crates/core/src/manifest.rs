//! Run manifests written next to every output file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Full argument vector; `odormap replay` re-executes it.
    pub argv: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub tool_version: String,
    pub outputs: Vec<String>,
    pub timestamp: DateTime<Utc>,
}

impl RunManifest {
    pub fn new(command: &str, argv: &[String], config: serde_json::Value) -> Self {
        RunManifest {
            command: command.to_string(),
            argv: argv.to_vec(),
            inputs: Vec::new(),
            config,
            seeds: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
            timestamp: Utc::now(),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<&mut Self> {
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: file_sha256(path)?,
        });
        Ok(self)
    }

    pub fn seed(&mut self, name: &str, seed: u64) -> &mut Self {
        self.seeds.insert(name.to_string(), seed);
        self
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.display().to_string());
        self
    }

    /// `<primary output>.manifest.json`
    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        output.with_file_name(name)
    }

    /// Writes the manifest next to the first output and returns its path.
    pub fn write(&self) -> Result<PathBuf> {
        let first = self
            .outputs
            .first()
            .ok_or_else(|| Error::Config("manifest without outputs".into()))?;
        let path = Self::path_for(Path::new(first));
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
