//! Output directory bookkeeping and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_file: String,
    pub config_hash: String,
    pub code_version: String,
    pub seed: Option<u64>,
    pub threads: usize,
    /// Seconds since the Unix epoch.
    pub start_time: f64,
    pub end_time: f64,
    pub outputs: Vec<OutputEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let d = Sha256::digest(bytes);
    d.iter().map(|b| format!("{b:02x}")).collect()
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// Collects the files written by one command.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    command: String,
    start: f64,
    seed: Option<u64>,
    config: Option<(String, String)>,
    entries: Vec<OutputEntry>,
}

impl Outputs {
    pub fn new(dir: &Path, command: &str) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::config(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), command: command.to_string(), start: now(), seed: None, config: None, entries: Vec::new() })
    }

    pub fn set_seed(&mut self, seed: Option<u64>) {
        self.seed = seed;
    }

    /// Stores the effective configuration as canonical JSON and hashes it.
    pub fn config<T: Serialize>(&mut self, cfg: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(cfg).map_err(|e| CliError::config(e.to_string()))? + "\n";
        let name = format!("{}.config.json", self.command);
        self.write(&name, text.as_bytes())?;
        self.config = Some((name, sha256_hex(text.as_bytes())));
        Ok(())
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        if self.entries.iter().any(|e| e.file == name) {
            return Err(CliError::numerical(format!("output {name} written twice")));
        }
        write_atomic(&self.dir.join(name), bytes)?;
        self.entries.push(OutputEntry { file: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::numerical(e.to_string()))? + "\n";
        self.write(name, text.as_bytes())
    }

    pub fn finish(self) -> Result<PathBuf, CliError> {
        let (config_file, config_hash) = self.config.unwrap_or_default();
        let manifest = RunManifest {
            command: self.command.clone(),
            config_file,
            config_hash,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: self.seed,
            threads: 1,
            start_time: self.start,
            end_time: now(),
            outputs: self.entries,
        };
        let path = self.dir.join(format!("{}.manifest.json", self.command));
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::numerical(e.to_string()))? + "\n";
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, bytes).map_err(|e| CliError::config(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| CliError::config(format!("cannot move {} into place: {e}", path.display())))
}

/// Comma-separated rows with a header; floats in shortest round-trip form.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { text: header.join(",") + "\n" }
    }

    pub fn with_header_line(line: &str) -> Self {
        Self { text: line.to_string() + "\n" }
    }

    pub fn row(&mut self, cols: &[String]) {
        self.text.push_str(&cols.join(","));
        self.text.push('\n');
    }

    pub fn raw_row(&mut self, line: &str) {
        self.text.push_str(line);
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

pub fn f(x: f64) -> String {
    format!("{x:e}")
}
