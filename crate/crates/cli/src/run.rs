use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command_line: String,
    pub command: String,
    pub config_digest: String,
    pub input_digests: BTreeMap<String, String>,
    pub output_digests: BTreeMap<String, String>,
    pub tool_version: String,
    pub rng_seed: Option<u64>,
    /// Command-specific bookkeeping (rows removed by the cut, records dropped
    /// by the threshold, ...).
    pub notes: BTreeMap<String, serde_json::Value>,
}

/// Tracks the files a command reads and writes so the manifest can list them.
pub struct Run {
    out_dir: PathBuf,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
    notes: BTreeMap<String, serde_json::Value>,
}

impl Run {
    pub fn new(out_dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(out_dir).map_err(|source| CliError::Io { path: out_dir.to_path_buf(), source })?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            notes: BTreeMap::new(),
        })
    }

    pub fn read(&mut self, path: &Path) -> CliResult<Vec<u8>> {
        let bytes = fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        self.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(bytes)
    }

    pub fn read_string(&mut self, path: &Path) -> CliResult<String> {
        let bytes = self.read(path)?;
        String::from_utf8(bytes).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.out_dir.join(name);
        fs::write(&path, bytes).map_err(|source| CliError::Io { path, source })?;
        self.outputs.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        self.notes
            .insert(key.to_string(), serde_json::to_value(value).expect("serializable note"));
    }

    pub fn finish(self, command_line: String, command: &str, config_digest: String, rng_seed: Option<u64>) -> CliResult<()> {
        let manifest = RunManifest {
            command_line,
            command: command.to_string(),
            config_digest,
            input_digests: self.inputs,
            output_digests: self.outputs,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            rng_seed,
            notes: self.notes,
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        let path = self.out_dir.join("manifest.json");
        fs::write(&path, text).map_err(|source| CliError::Io { path, source })
    }
}
