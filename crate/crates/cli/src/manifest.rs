use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// Record of one run: what was asked for, which seeds were used and what
/// was produced. Everything except `created_at` is a function of the inputs.
#[derive(Serialize)]
pub struct Manifest {
    command: &'static str,
    version: &'static str,
    config: Value,
    seeds: BTreeMap<String, u64>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    summary: Value,
    created_at: String,
}

impl Manifest {
    pub fn new(command: &'static str, config: impl Serialize) -> Result<Self> {
        Ok(Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config: serde_json::to_value(config)?,
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            summary: Value::Null,
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        })
    }

    pub fn seed(&mut self, stage: &str, value: u64) -> &mut Self {
        self.seeds.insert(stage.to_string(), value);
        self
    }

    pub fn input(&mut self, path: &Path) -> &mut Self {
        self.inputs.push(path.display().to_string());
        self
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.display().to_string());
        self
    }

    pub fn summary(&mut self, summary: impl Serialize) -> Result<&mut Self> {
        self.summary = serde_json::to_value(summary)?;
        Ok(self)
    }

    /// Writes `manifest.json` inside a directory output, or
    /// `<file>.manifest.json` next to a file output.
    pub fn write_beside(&self, output: &Path) -> Result<PathBuf> {
        let path = if output.is_dir() {
            output.join("manifest.json")
        } else {
            let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
            name.push(".manifest.json");
            output.with_file_name(name)
        };
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
