//! The run manifest: the resolved config plus everything needed to audit or
//! repeat a run.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_SCHEMA: u32 = 1;

/// Largest numeric residual of each kind seen during a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `max |tr rho - 1|` over all stored states.
    pub trace: f64,
    /// `max |rho - rho^H|` entrywise.
    pub hermiticity: f64,
    /// `max |L(I/N)|` per cell.
    pub unitality: f64,
    /// `max |Delta I - (Delta S_A + Delta S_B)|` on unitary cells.
    pub unitary_identity: Option<f64>,
    /// Largest imaginary part of the averaged OTOC decay.
    pub otoc_imag: Option<f64>,
    pub ledger: Option<f64>,
    pub ledger_joint: Option<f64>,
    pub fluctuation_theorem: Option<f64>,
    pub average_identity: Option<f64>,
    pub witness_violation: Option<f64>,
    pub maximal_scrambling_gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Software {
    pub name: String,
    pub version: String,
}

impl Default for Software {
    fn default() -> Self {
        Self {
            name: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub manifest_schema: u32,
    pub software: Software,
    /// sha256 of the canonical JSON of `config`.
    pub run_id: String,
    pub config: ExperimentConfig,
    pub defaults_applied: Vec<String>,
    pub realization_seeds: Vec<u64>,
    pub thermolab_seed: Option<u64>,
    pub workers: usize,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
    pub residuals: Residuals,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn run_id(config: &ExperimentConfig) -> String {
    let json = serde_json::to_vec(config).expect("config serialises");
    sha256_hex(&json)
}

impl RunManifest {
    pub fn read(dir: &Path) -> CliResult<(Self, Vec<u8>)> {
        let path = dir.join(MANIFEST_FILE);
        if !path.is_file() {
            return Err(CliError::Input(format!("no manifest found in {}", dir.display())));
        }
        let bytes = std::fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        let manifest = serde_json::from_slice(&bytes)
            .map_err(|e| CliError::Input(format!("{}: malformed manifest: {e}", path.display())))?;
        Ok((manifest, bytes))
    }

    pub fn file(&self, name: &str) -> Option<&FileEntry> {
        self.files.iter().find(|f| f.name == name)
    }
}
