//! Output files and the run manifest.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::commands::{Artifact, Context};
use crate::config::SeedSection;
use crate::CliError;

pub const MANIFEST_NAME: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub irlv_version: String,
    /// SHA-256 of the canonical configuration text.
    pub config_sha256: String,
    pub seed_offset: u64,
    /// Seeds after applying the offset.
    pub seeds: SeedSection,
    pub outputs: Vec<OutputEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

/// Writes every artifact under `dir`, then the manifest.
pub fn write_outputs(
    dir: &Path,
    command: &str,
    ctx: &Context,
    artifacts: &[Artifact],
) -> Result<RunManifest, CliError> {
    fs::create_dir_all(dir)?;
    let mut outputs = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        fs::write(dir.join(&a.name), &a.bytes)?;
        outputs.push(OutputEntry {
            file: a.name.clone(),
            sha256: sha256_hex(&a.bytes),
        });
    }
    let manifest = RunManifest {
        command: command.to_string(),
        irlv_version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: sha256_hex(ctx.cfg.canonical().as_bytes()),
        seed_offset: ctx.seed_offset,
        seeds: ctx.seeds,
        outputs,
    };
    let text = toml::to_string(&manifest).expect("manifest serializes");
    write_atomic(&dir.join(MANIFEST_NAME), text.as_bytes())?;
    Ok(manifest)
}
