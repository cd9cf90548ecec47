//! Reading projects from disk: bare `project.json` or a zipped `.sb3`.

use std::fs;
use std::io::{self, Cursor, Read};
use std::path::Path;

use blockcheck_core::{parse_project, LoadError, RawProject};

const ENTRY: &str = "project.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Json,
    Sb3,
}

impl SourceKind {
    /// Zip local-file magic decides; the extension is not trusted.
    pub fn sniff(bytes: &[u8]) -> Self {
        if bytes.starts_with(b"PK\x03\x04") {
            SourceKind::Sb3
        } else {
            SourceKind::Json
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Load(#[from] LoadError),
}

/// The `project.json` bytes inside an archive.
pub fn extract_project_json(archive: &[u8]) -> Result<Vec<u8>, LoadError> {
    let mut zip = zip::ZipArchive::new(Cursor::new(archive)).map_err(|e| LoadError::InvalidArchive(e.to_string()))?;
    let mut entry = match zip.by_name(ENTRY) {
        Ok(entry) => entry,
        Err(zip::result::ZipError::FileNotFound) => return Err(LoadError::MissingArchiveEntry),
        Err(e) => return Err(LoadError::InvalidArchive(e.to_string())),
    };
    let mut out = Vec::with_capacity(entry.size() as usize);
    entry
        .read_to_end(&mut out)
        .map_err(|e| LoadError::InvalidArchive(e.to_string()))?;
    Ok(out)
}

pub fn load_bytes(bytes: &[u8], kind: SourceKind) -> Result<RawProject, LoadError> {
    match kind {
        SourceKind::Json => parse_project(bytes),
        SourceKind::Sb3 => parse_project(&extract_project_json(bytes)?),
    }
}

pub fn load_project(mut source: impl Read, kind: SourceKind) -> Result<RawProject, ReadError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    Ok(load_bytes(&bytes, kind)?)
}

/// `project.json` bytes of a file on disk, unpacking archives.
pub fn read_project_json(path: &Path) -> Result<Vec<u8>, ReadError> {
    let bytes = fs::read(path)?;
    match SourceKind::sniff(&bytes) {
        SourceKind::Json => Ok(bytes),
        SourceKind::Sb3 => Ok(extract_project_json(&bytes)?),
    }
}

pub fn load_path(path: &Path) -> Result<RawProject, ReadError> {
    Ok(parse_project(&read_project_json(path)?)?)
}
