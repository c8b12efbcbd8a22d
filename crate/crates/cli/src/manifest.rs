//! The run manifest: one `manifest.json` per output directory, written as
//! `running` before any heavy work and finalized on exit.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunState {
    Running,
    Completed,
    InvariantBreach,
    GuardTripped,
    Failed,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Timestamps {
    pub started: String,
    pub finished: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: PathBuf,
    pub config_sha256: String,
    pub schema_version: u32,
    pub seeds: Vec<u64>,
    pub versions: BTreeMap<String, String>,
    pub workers: usize,
    pub timestamps: Timestamps,
    pub status: RunState,
    pub exit_code: Option<i32>,
    pub message: Option<String>,
    /// Output files relative to the directory, sorted.
    pub outputs: Vec<String>,
    pub summary: Value,
    /// Trajectory index for `simulate`; readable by the snapshot loader.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Value>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn start(command: &str, config_path: &Path, config_bytes: &[u8], schema_version: u32) -> Self {
        let versions = BTreeMap::from([
            ("besov-mhd".to_string(), besov_mhd::VERSION.to_string()),
            ("besov-mhd-cli".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ]);
        Self {
            command: command.to_string(),
            config_path: config_path.to_path_buf(),
            config_sha256: sha256_hex(config_bytes),
            schema_version,
            seeds: Vec::new(),
            versions,
            workers: rayon::current_num_threads(),
            timestamps: Timestamps { started: now(), finished: None },
            status: RunState::Running,
            exit_code: None,
            message: None,
            outputs: Vec::new(),
            summary: Value::Null,
            trajectory: None,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn finish(&mut self, status: RunState, exit_code: i32, message: Option<String>) {
        self.status = status;
        self.exit_code = Some(exit_code);
        self.message = message;
        self.timestamps.finished = Some(now());
        self.outputs.sort();
        self.outputs.dedup();
    }
}

/// Collects the files a command writes.
pub struct Outputs<'a> {
    pub dir: &'a Path,
    pub files: Vec<String>,
}

impl<'a> Outputs<'a> {
    pub fn new(dir: &'a Path) -> Self {
        Self { dir, files: Vec::new() }
    }

    pub fn text(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        std::fs::write(self.dir.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.text(name, &(serde_json::to_string_pretty(value)? + "\n"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
