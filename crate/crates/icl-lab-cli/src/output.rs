//! Atomic output writing: every artifact lands via a temp file and a rename,
//! so failed runs leave nothing half-written behind.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {dir:?}"))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).context("creating temp file")?;
    tmp.write_all(bytes).context("writing temp file")?;
    let target = dir.join(name);
    tmp.persist(&target)
        .with_context(|| format!("renaming into {target:?}"))?;
    Ok(target)
}

/// Content hash of the experiment definition (the resolved config without
/// its output location).
pub fn config_hash(config: &ExperimentConfig) -> anyhow::Result<String> {
    let mut stripped = config.clone();
    strip_output_dir(&mut stripped);
    let bytes = serde_json::to_vec(&stripped)?;
    let digest = Sha256::digest(&bytes);
    Ok(format!("{digest:x}"))
}

fn strip_output_dir(config: &mut ExperimentConfig) {
    match config {
        ExperimentConfig::AlgoselectError(c) | ExperimentConfig::AlgoselectDistance(c) => {
            c.output_dir = None;
        }
        ExperimentConfig::Curves { output_dir, .. }
        | ExperimentConfig::DoubleDescent { output_dir, .. }
        | ExperimentConfig::RetrievalEval { output_dir, .. }
        | ExperimentConfig::TheoryCheck { output_dir, .. }
        | ExperimentConfig::OracleCheck { output_dir, .. } => *output_dir = None,
    }
}

/// The exact resolved config as JSON, with the content hash and binary
/// version alongside.
pub fn echo_json(config: &ExperimentConfig) -> anyhow::Result<String> {
    let hash = config_hash(config)?;
    let echo = serde_json::json!({
        "config": config,
        "content_hash": hash,
        "binary_version": env!("CARGO_PKG_VERSION"),
    });
    let mut s = serde_json::to_string_pretty(&echo)?;
    s.push('\n');
    Ok(s)
}
