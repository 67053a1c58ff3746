use std::fs;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use lpoint_core::config::RunConfig;
use serde::Serialize;

/// Output directory plus the files written so far, in write order.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    pub fn new(dir: PathBuf) -> Self {
        Self { dir, files: Vec::new() }
    }

    pub fn prepare(&self) -> std::io::Result<()> {
        fs::create_dir_all(&self.dir)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    /// Write through a `std::io::Write` sink.
    pub fn write_with(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, &buf)
    }

    pub fn files(&self) -> Vec<String> {
        self.files.clone()
    }

    pub fn write_manifest(&self, m: &Manifest) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let path = self.dir.join("manifest.json");
        let mut s = serde_json::to_string_pretty(m)?;
        s.push('\n');
        fs::write(&path, s).with_context(|| format!("writing {}", path.display()))
    }
}

#[derive(Serialize)]
pub struct ErrorRecord {
    pub kind: &'static str,
    pub message: String,
}

/// Run record. The timestamp appears here and nowhere else.
#[derive(Serialize)]
pub struct Manifest {
    pub command: &'static str,
    pub version: &'static str,
    pub timestamp_unix: u64,
    pub exit_code: u8,
    pub outputs: Vec<String>,
    pub error: Option<ErrorRecord>,
    /// Fully resolved configuration as TOML.
    pub config: Option<String>,
}

impl Manifest {
    pub fn new(
        command: &'static str,
        cfg: Option<&RunConfig>,
        outputs: Vec<String>,
        exit_code: u8,
        error: Option<(&'static str, String)>,
    ) -> Self {
        Self {
            command,
            version: env!("CARGO_PKG_VERSION"),
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            exit_code,
            outputs,
            error: error.map(|(kind, message)| ErrorRecord { kind, message }),
            config: cfg.map(RunConfig::to_toml_string),
        }
    }
}
