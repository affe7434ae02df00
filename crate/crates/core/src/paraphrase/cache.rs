use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ParaphraseError;

/// One line of the cache file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParaphraseCacheEntry {
    pub key: String,
    pub value: String,
    pub created_at: String,
}

/// Hex SHA-256 over the NUL-separated triple.
pub fn cache_key(question: &str, model_name: &str, prompt_version: &str) -> String {
    let mut h = Sha256::new();
    for part in [question, model_name, prompt_version] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}

/// Append-only JSONL cache of raw model replies. In memory when no path is
/// given.
#[derive(Debug, Default)]
pub struct ParaphraseCache {
    path: Option<PathBuf>,
    entries: HashMap<String, String>,
    writer: Option<File>,
}

impl ParaphraseCache {
    pub fn in_memory() -> Self {
        ParaphraseCache::default()
    }

    /// Loads every entry of `path` (later lines win) and appends new ones to
    /// it. A missing file is created on first insert.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, ParaphraseError> {
        let path = path.as_ref().to_path_buf();
        let mut entries = HashMap::new();
        if path.exists() {
            let f = File::open(&path)
                .map_err(|e| ParaphraseError::Cache(format!("{}: {e}", path.display())))?;
            for (i, line) in BufReader::new(f).lines().enumerate() {
                let line =
                    line.map_err(|e| ParaphraseError::Cache(format!("{}: {e}", path.display())))?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: ParaphraseCacheEntry = serde_json::from_str(&line).map_err(|e| {
                    ParaphraseError::Cache(format!("{} line {}: {e}", path.display(), i + 1))
                })?;
                entries.insert(entry.key, entry.value);
            }
        }
        Ok(ParaphraseCache {
            path: Some(path),
            entries,
            writer: None,
        })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, key: String, value: String) -> Result<(), ParaphraseError> {
        if value.trim().is_empty() {
            return Err(ParaphraseError::Cache(
                "refusing to cache an empty value".into(),
            ));
        }
        if let Some(path) = &self.path {
            if self.writer.is_none() {
                let f = OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(path)
                    .map_err(|e| ParaphraseError::Cache(format!("{}: {e}", path.display())))?;
                self.writer = Some(f);
            }
            let entry = ParaphraseCacheEntry {
                key: key.clone(),
                value: value.clone(),
                created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            };
            let line = serde_json::to_string(&entry).expect("entry serializes");
            let w = self.writer.as_mut().expect("opened above");
            writeln!(w, "{line}")
                .map_err(|e| ParaphraseError::Cache(format!("{}: {e}", path.display())))?;
        }
        self.entries.insert(key, value);
        Ok(())
    }
}
