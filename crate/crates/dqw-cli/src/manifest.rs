//! Machine-readable run manifest, emitted next to every artifact set.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub resolved_config: serde_json::Value,
    pub wall_time_s: f64,
    pub cache_hits: usize,
    pub cache_misses: usize,
    pub checks: Vec<CheckRecord>,
    pub warnings: Vec<String>,
    pub artifacts: Vec<String>,
    #[serde(skip)]
    started: Option<Instant>,
}

impl RunManifest {
    pub fn start(command: &str, resolved_config: serde_json::Value) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            resolved_config,
            wall_time_s: 0.0,
            cache_hits: 0,
            cache_misses: 0,
            checks: Vec::new(),
            warnings: Vec::new(),
            artifacts: Vec::new(),
            started: Some(Instant::now()),
        }
    }

    pub fn check(&mut self, name: &str, value: f64, threshold: f64, pass: bool) {
        self.checks.push(CheckRecord {
            name: name.to_string(),
            pass,
            value,
            threshold,
        });
    }

    /// A residual-style check: passes when `value <= threshold`.
    pub fn check_below(&mut self, name: &str, value: f64, threshold: f64) {
        self.check(name, value, threshold, value <= threshold);
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    pub fn artifact(&mut self, path: &Path) {
        self.artifacts.push(path.display().to_string());
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn write(&mut self, out_dir: &Path) -> Result<PathBuf, CliError> {
        if let Some(t0) = self.started.take() {
            self.wall_time_s = t0.elapsed().as_secs_f64();
        }
        let path = out_dir.join(format!("{}-manifest.json", self.command));
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Io(format!("manifest encode: {e}")))?;
        std::fs::write(&path, json)
            .map_err(|e| CliError::Io(format!("manifest write {}: {e}", path.display())))?;
        Ok(path)
    }
}
