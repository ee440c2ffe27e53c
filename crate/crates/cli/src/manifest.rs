//! Run manifest: written into the output directory before any records so
//! every output set is self-describing, then finalized when the run ends.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub config_path: String,
    pub output_dir: String,
    /// Resolved command parameters, flags included.
    pub params: serde_json::Value,
    pub resolved_seed: u64,
    pub timestamp: String,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiments: Option<usize>,
    /// Decisions where a backend failed and the agent held its state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback_decisions: Option<usize>,
}

impl RunManifest {
    pub fn new(
        subcommand: &str,
        config_path: &Path,
        output_dir: &Path,
        params: serde_json::Value,
        resolved_seed: u64,
    ) -> Self {
        Self {
            tool: "consensus".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            config_path: config_path.display().to_string(),
            output_dir: output_dir.display().to_string(),
            params,
            resolved_seed,
            timestamp: chrono::Utc::now().to_rfc3339(),
            status: "running".into(),
            experiments: None,
            fallback_decisions: None,
        }
    }

    pub fn write(&self, output_dir: &Path) -> Result<()> {
        let path = output_dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).context("serialize manifest")?;
        std::fs::write(&path, text + "\n").with_context(|| format!("write {}", path.display()))
    }
}
