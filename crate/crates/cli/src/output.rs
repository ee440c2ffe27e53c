//! Output-directory handling shared by the subcommands.

use std::path::Path;

use anyhow::{Context, Result};

use crate::manifest::RunManifest;

pub fn prepare_output_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))
}

/// Mark the run failed in the manifest and drop any partially written
/// outputs, then propagate the error.
pub fn fail_run(
    manifest: &mut RunManifest,
    out_dir: &Path,
    partial_files: &[&str],
    error: anyhow::Error,
) -> Result<()> {
    for name in partial_files {
        let _ = std::fs::remove_file(out_dir.join(name));
    }
    manifest.status = "failed".into();
    let _ = manifest.write(out_dir);
    Err(error)
}
