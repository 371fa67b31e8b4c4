//! Persisted speech summaries: JSON-lines files whose first line is a
//! manifest (config snapshot, dataset fingerprint, schema) followed by one
//! record per line in key order.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::dataset::Dataset;
use crate::error::{EngineError, Result};
use crate::scope::scope_key_from_labels;

/// One fact as persisted: original-string bindings plus value and support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordFact {
    pub scope: Vec<(String, String)>,
    pub value: f64,
    pub support: usize,
}

/// A pre-generated answer for one (target, query scope) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeechRecord {
    pub target: String,
    /// Query-scope bindings as original strings, sorted by column name.
    pub scope: Vec<(String, String)>,
    /// Facts in presentation order.
    pub facts: Vec<RecordFact>,
    pub utility: f64,
    pub base_error: f64,
    pub text: String,
}

impl SpeechRecord {
    pub fn key(&self) -> String {
        record_key(&self.target, &self.scope)
    }
}

/// Canonical record key: `target | sorted col=value bindings joined by &`.
pub fn record_key(target: &str, scope: &[(String, String)]) -> String {
    format!("{}|{}", target, scope_key_from_labels(scope))
}

/// Dimension dictionaries and target names, persisted so queries can be
/// parsed against a store without reloading the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreSchema {
    pub dimensions: Vec<DimensionSchema>,
    pub targets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionSchema {
    pub name: String,
    pub values: Vec<String>,
}

impl StoreSchema {
    pub fn of(ds: &Dataset) -> Self {
        Self {
            dimensions: ds
                .dimensions()
                .iter()
                .map(|d| DimensionSchema {
                    name: d.name().to_string(),
                    values: d.dictionary().to_vec(),
                })
                .collect(),
            targets: ds.targets().iter().map(|t| t.name().to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreManifest {
    pub version: u32,
    pub config: EngineConfig,
    /// FNV-1a 64 of the raw data file, hex.
    pub fingerprint: String,
    pub schema: StoreSchema,
}

/// In-memory store: records keyed by canonical key, unique and sorted.
#[derive(Debug, Clone)]
pub struct SpeechStore {
    pub manifest: StoreManifest,
    records: BTreeMap<String, SpeechRecord>,
}

impl SpeechStore {
    pub fn new(manifest: StoreManifest) -> Self {
        Self { manifest, records: BTreeMap::new() }
    }

    pub fn insert(&mut self, record: SpeechRecord) -> Result<()> {
        match self.records.entry(record.key()) {
            Entry::Vacant(slot) => {
                slot.insert(record);
                Ok(())
            }
            Entry::Occupied(slot) => Err(EngineError::DuplicateKey(slot.key().clone())),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&SpeechRecord> {
        self.records.get(key)
    }

    /// Records in key order.
    pub fn records(&self) -> impl Iterator<Item = &SpeechRecord> {
        self.records.values()
    }

    /// The persisted form: manifest line plus one record line per key.
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.manifest).expect("manifest serializes");
        out.push('\n');
        for record in self.records.values() {
            out.push_str(&serde_json::to_string(record).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_jsonl())
            .map_err(|source| EngineError::Io { path: path.to_path_buf(), source })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|source| EngineError::Io { path: path.to_path_buf(), source })?;
        Self::from_jsonl(&text)
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, manifest_line) = lines.next().ok_or_else(|| EngineError::Store {
            line: Some(1),
            message: "empty store file".into(),
        })?;
        let manifest: StoreManifest =
            serde_json::from_str(manifest_line).map_err(|e| EngineError::Store {
                line: Some(1),
                message: format!("bad manifest: {}", e),
            })?;
        let mut store = Self::new(manifest);
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let record: SpeechRecord =
                serde_json::from_str(line).map_err(|e| EngineError::Store {
                    line: Some(idx + 1),
                    message: e.to_string(),
                })?;
            store.insert(record).map_err(|e| EngineError::Store {
                line: Some(idx + 1),
                message: e.to_string(),
            })?;
        }
        Ok(store)
    }

    /// Warn when the data file the store was built from has changed.
    /// A missing file is not a mismatch; stores are self-contained.
    pub fn freshness_warning(&self) -> Option<String> {
        let bytes = fs::read(&self.manifest.config.data).ok()?;
        let fingerprint = format!("{:016x}", fnv1a64(&bytes));
        if fingerprint != self.manifest.fingerprint {
            Some(format!(
                "data file {} changed since preprocessing (fingerprint {} != {})",
                self.manifest.config.data, fingerprint, self.manifest.fingerprint
            ))
        } else {
            None
        }
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_matches_reference_vectors() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn record_keys_sort_bindings() {
        let key = record_key(
            "delay",
            &[("region".into(), "North".into()), ("season".into(), "Winter".into())],
        );
        assert_eq!(key, "delay|region=North&season=Winter");
        assert_eq!(record_key("delay", &[]), "delay|");
    }
}
