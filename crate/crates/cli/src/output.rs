//! Result store: CSV tables with a provenance comment block and a JSON
//! manifest of every run.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const ARTIFACT_VERSION: &str = concat!("schwinger-cli ", env!("CARGO_PKG_VERSION"));
pub const MANIFEST_NAME: &str = "manifest.json";

/// Hex SHA-256 of the command, the resolved config and the seed.
pub fn config_hash<T: Serialize>(command: &str, config: &T, seed: u64) -> String {
    let json = serde_json::to_string(config).expect("configs serialize");
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0]);
    h.update(json.as_bytes());
    h.update([0]);
    h.update(seed.to_le_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub label: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub artifact_version: String,
    pub timestamp_unix: u64,
    pub status: String,
    pub files: Vec<String>,
    #[serde(default)]
    pub skipped: Vec<SkippedPoint>,
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(MANIFEST_NAME);
        if !path.exists() {
            return Ok(Self::default());
        }
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::io(format!("corrupt manifest {}: {e}", path.display())))
    }

    /// Adds `entry`, replacing a previous entry for the same run.
    pub fn record(&mut self, entry: ManifestEntry) {
        self.entries
            .retain(|e| !(e.command == entry.command && e.config_hash == entry.config_hash && e.seed == entry.seed));
        self.entries.push(entry);
    }

    pub fn save(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(MANIFEST_NAME);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(|e| CliError::io(format!("{}: {e}", path.display())))
    }
}

/// Output of one command invocation.
pub struct ResultStore {
    dir: PathBuf,
    command: String,
    hash: String,
    seed: u64,
    config: serde_json::Value,
    files: Vec<String>,
    skipped: Vec<SkippedPoint>,
}

impl ResultStore {
    pub fn new<T: Serialize>(dir: &Path, command: &str, config: &T, seed: u64) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            hash: config_hash(command, config, seed),
            seed,
            config: serde_json::to_value(config).expect("configs serialize"),
            files: Vec::new(),
            skipped: Vec::new(),
        })
    }

    pub fn file_count(&self) -> usize {
        self.files.len()
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn skip(&mut self, label: impl Into<String>, reason: impl Into<String>) {
        self.skipped.push(SkippedPoint {
            label: label.into(),
            reason: reason.into(),
        });
    }

    /// Writes `<command>-<hash12>-<table>.csv` and returns its path.
    pub fn write_table(&mut self, table: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
        let name = format!("{}-{}-{}.csv", self.command, &self.hash[..12], table);
        let path = self.dir.join(&name);
        let mut buf = format!(
            "# command: {}\n# table: {}\n# config_hash: {}\n# seed: {}\n# artifact_version: {}\n",
            self.command, table, self.hash, self.seed, ARTIFACT_VERSION
        )
        .into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(header).map_err(CliError::io)?;
            for r in rows {
                if r.len() != header.len() {
                    return Err(CliError::numerical(format!(
                        "table {table}: row has {} fields, header has {}",
                        r.len(),
                        header.len()
                    )));
                }
                w.write_record(r).map_err(CliError::io)?;
            }
            w.flush().map_err(CliError::io)?;
        }
        fs::write(&path, buf).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        eprintln!("wrote {}", path.display());
        self.files.push(name);
        Ok(path)
    }

    /// Records this run in the manifest with `status`.
    pub fn finish(&self, status: &str) -> Result<(), CliError> {
        let mut manifest = Manifest::load(&self.dir)?;
        let timestamp_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        manifest.record(ManifestEntry {
            command: self.command.clone(),
            config_hash: self.hash.clone(),
            seed: self.seed,
            artifact_version: ARTIFACT_VERSION.to_string(),
            timestamp_unix,
            status: status.to_string(),
            files: self.files.clone(),
            skipped: self.skipped.clone(),
            config: self.config.clone(),
        });
        manifest.save(&self.dir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_depends_on_seed_and_command() {
        let a = config_hash("spectrum", &vec![1, 2], 0);
        assert_eq!(a.len(), 64);
        assert_eq!(a, config_hash("spectrum", &vec![1, 2], 0));
        assert_ne!(a, config_hash("spectrum", &vec![1, 2], 1));
        assert_ne!(a, config_hash("theta", &vec![1, 2], 0));
    }

    #[test]
    fn manifest_replaces_same_run() {
        let entry = |status: &str| ManifestEntry {
            command: "theta".into(),
            config_hash: "ab".into(),
            seed: 1,
            artifact_version: ARTIFACT_VERSION.into(),
            timestamp_unix: 0,
            status: status.into(),
            files: vec![],
            skipped: vec![],
            config: serde_json::Value::Null,
        };
        let mut m = Manifest::default();
        m.record(entry("partial"));
        m.record(entry("complete"));
        assert_eq!(m.entries.len(), 1);
        assert_eq!(m.entries[0].status, "complete");
    }
}
