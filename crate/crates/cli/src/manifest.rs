//! Run manifests: a JSON record written next to every command's outputs with
//! the resolved configuration, SHA-256 digests of the inputs, the seed (when
//! the command is stochastic), and the list of files produced. Re-running a
//! deterministic command from its manifest reproduces the outputs bit-exactly.

use std::fs::File;
use std::io::Read as _;
use std::path::{Path, PathBuf};

use interevent::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// An input file and the SHA-256 digest of its bytes.
#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// The record written as `manifest.json` alongside every command's outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    /// Command name, subcommand included (e.g. `fit superscaling`).
    pub command: String,
    /// Tool version at the time of the run.
    pub version: String,
    /// Fully resolved configuration (flags and config-file values merged).
    pub config: serde_json::Value,
    /// Digests of every file the command read.
    pub inputs: Vec<InputDigest>,
    /// Seed actually used, for stochastic commands.
    pub seed: Option<u64>,
    /// Files written, relative to the output directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            inputs: Vec::new(),
            seed: None,
            outputs: Vec::new(),
        }
    }

    /// Digest an input file and record it.
    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    pub fn add_output(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    /// Write the manifest itself (always named `manifest.json`).
    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join("manifest.json");
        interevent::io::write_json(&path, self)?;
        Ok(path)
    }
}

/// Hex SHA-256 of a file's bytes, streamed in 64 KiB chunks.
pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 65536];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}
