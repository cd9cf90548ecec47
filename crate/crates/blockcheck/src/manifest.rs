//! Corpus manifest: one JSON record per line, appended as downloads finish.
//! When an id appears more than once the last record wins.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const FILE_NAME: &str = "manifest.jsonl";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectMeta {
    pub id: u64,
    pub title: String,
    pub remix_parent: Option<u64>,
    #[serde(default)]
    pub author: serde_json::Value,
    pub fetched_at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Status {
    Ok,
    SkippedRemix { parent: u64 },
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub id: u64,
    #[serde(flatten)]
    pub status: Status,
    /// Relative to the manifest's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checksum: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<ProjectMeta>,
    pub timestamp: u64,
}

impl Entry {
    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<Entry>,
}

impl Manifest {
    /// Replay a manifest file. A missing file is an empty manifest; a
    /// truncated last line (interrupted write) is ignored.
    pub fn read(path: &Path) -> io::Result<Self> {
        let file = match File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Self::default()),
            Err(e) => return Err(e),
        };
        let mut entries: Vec<Entry> = Vec::new();
        let mut index: HashMap<u64, usize> = HashMap::new();
        for line in BufReader::new(file).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let Ok(entry) = serde_json::from_str::<Entry>(&line) else {
                continue;
            };
            match index.get(&entry.id) {
                Some(&i) => entries[i] = entry,
                None => {
                    index.insert(entry.id, entries.len());
                    entries.push(entry);
                }
            }
        }
        Ok(Manifest { entries })
    }

    pub fn get(&self, id: u64) -> Option<&Entry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn ok_paths(&self, dir: &Path) -> Vec<(u64, PathBuf)> {
        self.entries
            .iter()
            .filter(|e| e.is_ok())
            .filter_map(|e| e.path.as_ref().map(|p| (e.id, dir.join(p))))
            .collect()
    }
}

/// Append-only writer.
pub struct Writer {
    file: File,
}

impl Writer {
    pub fn open(path: &Path) -> io::Result<Self> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Writer { file })
    }

    pub fn append(&mut self, entry: &Entry) -> io::Result<()> {
        let mut line = serde_json::to_vec(entry)?;
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.flush()
    }
}

pub fn checksum(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_checksum(path: &Path) -> io::Result<String> {
    Ok(checksum(&fs::read(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(id: u64, status: Status) -> Entry {
        Entry {
            id,
            status,
            path: None,
            checksum: None,
            meta: None,
            timestamp: 0,
        }
    }

    #[test]
    fn last_record_wins_and_order_is_first_seen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(FILE_NAME);
        let mut w = Writer::open(&path).unwrap();
        w.append(&entry(2, Status::Failed { reason: "x".into() })).unwrap();
        w.append(&entry(1, Status::SkippedRemix { parent: 9 })).unwrap();
        w.append(&entry(2, Status::Ok)).unwrap();
        drop(w);
        fs::OpenOptions::new().append(true).open(&path).unwrap().write_all(b"{\"id\":3,").unwrap();
        let m = Manifest::read(&path).unwrap();
        assert_eq!(m.entries.iter().map(|e| e.id).collect::<Vec<_>>(), [2, 1]);
        assert!(m.get(2).unwrap().is_ok());
    }

    #[test]
    fn record_shape() {
        let line = serde_json::to_string(&entry(7, Status::SkippedRemix { parent: 3 })).unwrap();
        assert_eq!(line, r#"{"id":7,"status":"skipped-remix","parent":3,"timestamp":0}"#);
    }

    #[test]
    fn sha256_hex() {
        assert_eq!(checksum(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
