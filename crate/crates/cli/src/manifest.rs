use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{CliError, CliResult};

pub const FILE_NAME: &str = "manifest.json";

/// Provenance record written next to every generated dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub seed: u64,
    /// SHA-256 of the effective configuration as canonical JSON.
    pub config_digest: String,
    /// Input path as given on the command line -> SHA-256.
    pub inputs: BTreeMap<String, String>,
    /// Output file name inside the run directory -> SHA-256.
    pub outputs: BTreeMap<String, String>,
    pub started_at: String,
    pub finished_at: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Input(format!("reading {}: {e}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub fn write(dir: &Path, m: &RunManifest) -> CliResult<()> {
    let text = serde_json::to_string_pretty(m).map_err(|e| CliError::Internal(e.to_string()))?;
    let path = dir.join(FILE_NAME);
    std::fs::write(&path, text + "\n")
        .map_err(|e| CliError::Internal(format!("writing {}: {e}", path.display())))
}

/// Names of outputs whose digest no longer matches the manifest.
pub fn verify(dir: &Path) -> CliResult<Vec<String>> {
    let path = dir.join(FILE_NAME);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Input(format!("reading {}: {e}", path.display())))?;
    let m: RunManifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut bad = Vec::new();
    for (name, digest) in &m.outputs {
        match file_digest(&dir.join(name)) {
            Ok(d) if &d == digest => {}
            _ => bad.push(name.clone()),
        }
    }
    Ok(bad)
}
