//! Analysing many projects: finding them, fanning out over a worker pool and
//! folding the results in input order.

use std::io;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use blockcheck_core::{analyze_json, AnalysisReport, CorpusStats, Registry, RegistryError, Selection};
use rayon::prelude::*;
use walkdir::WalkDir;

use crate::archive::read_project_json;
use crate::manifest::Manifest;

/// Deep projects recurse deeply; give workers room.
pub const WORKER_STACK: usize = 64 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusItem {
    /// Name used in reports: the project id for manifest entries, otherwise
    /// the path relative to the corpus directory.
    pub name: String,
    pub path: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

fn is_project_file(path: &Path) -> bool {
    matches!(path.extension().and_then(|e| e.to_str()), Some("json" | "sb3"))
}

fn is_manifest(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()) == Some("jsonl")
}

/// Projects under `input`.
///
/// A directory is searched recursively for `.json` and `.sb3` files, sorted by
/// path. If it holds a manifest, only the manifest's downloaded entries are
/// used. A `.jsonl` file is read as a manifest, a single project file is
/// itself.
pub fn discover(input: &Path) -> io::Result<Vec<CorpusItem>> {
    if input.is_dir() {
        let manifest = input.join(crate::manifest::FILE_NAME);
        if manifest.is_file() {
            return from_manifest(&manifest);
        }
        let mut items = Vec::new();
        for entry in WalkDir::new(input).sort_by_file_name() {
            let entry = entry.map_err(io::Error::other)?;
            if entry.file_type().is_file() && is_project_file(entry.path()) {
                let rel = entry.path().strip_prefix(input).unwrap_or(entry.path());
                items.push(CorpusItem {
                    name: rel.to_string_lossy().replace('\\', "/"),
                    path: entry.path().to_path_buf(),
                });
            }
        }
        return Ok(items);
    }
    if !input.exists() {
        return Err(io::Error::new(io::ErrorKind::NotFound, format!("{} does not exist", input.display())));
    }
    if is_manifest(input) {
        return from_manifest(input);
    }
    Ok(vec![CorpusItem {
        name: input.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        path: input.to_path_buf(),
    }])
}

fn from_manifest(path: &Path) -> io::Result<Vec<CorpusItem>> {
    let dir = path.parent().unwrap_or(Path::new("."));
    Ok(Manifest::read(path)?
        .ok_paths(dir)
        .into_iter()
        .map(|(id, path)| CorpusItem { name: id.to_string(), path })
        .collect())
}

/// Analyse one file. Unreadable or unparseable files give a parse-error
/// report, so a corpus run never loses a project silently.
pub fn analyze_file(
    name: &str,
    path: &Path,
    registry: &Registry,
    selection: &Selection,
) -> Result<AnalysisReport, RegistryError> {
    registry.check(selection)?;
    match read_project_json(path) {
        Ok(bytes) => guarded(name, || analyze_json(name, &bytes, registry, selection)),
        Err(e) => Ok(AnalysisReport::parse_error(name, e)),
    }
}

/// A panic inside the analysis of one project is reported against that
/// project instead of taking the whole run down.
fn guarded(
    name: &str,
    f: impl FnOnce() -> Result<AnalysisReport, RegistryError>,
) -> Result<AnalysisReport, RegistryError> {
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(payload) => {
            let what = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_default();
            Ok(AnalysisReport::parse_error(name, format!("internal error: {what}")))
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub jobs: usize,
    pub selection: Selection,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            jobs: crate::config::default_jobs(),
            selection: Selection::All,
        }
    }
}

/// Analyse `items` on `jobs` workers. Reports reach `on_report` in the order
/// of `items` whatever the worker count, and the statistics are folded in
/// that same order on the calling thread.
pub fn analyze_corpus(
    items: &[CorpusItem],
    registry: &Registry,
    options: &AnalyzeOptions,
    mut on_report: impl FnMut(&AnalysisReport) -> io::Result<()>,
) -> Result<CorpusStats, CorpusError> {
    registry.check(&options.selection)?;
    let jobs = options.jobs.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .stack_size(WORKER_STACK)
        .thread_name(|i| format!("blockcheck-worker-{i}"))
        .build()
        .map_err(|e| CorpusError::Pool(e.to_string()))?;

    let mut stats = CorpusStats::new(&registry.descriptors());
    // Bounded batches keep memory flat on large corpora.
    for batch in items.chunks(jobs * 16) {
        let reports: Vec<Result<AnalysisReport, RegistryError>> = pool.install(|| {
            batch
                .par_iter()
                .map(|item| analyze_file(&item.name, &item.path, registry, &options.selection))
                .collect()
        });
        for report in reports {
            let report = report?;
            stats.add(&report);
            on_report(&report)?;
        }
    }
    Ok(stats)
}
