//! Downloading projects and their metadata from the Scratch web services.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::thread;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use crossbeam_channel::{bounded, unbounded, Receiver};
use serde::Deserialize;

use crate::manifest::{self, Entry, Manifest, ProjectMeta, Status};
use blockcheck_core::{parse_project, LoadError};

/// Projects larger than this are refused.
const MAX_PROJECT_BYTES: u64 = 64 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct FetchSettings {
    pub api_base: String,
    pub project_base: String,
    /// Requests per second over all workers; zero or less disables pacing.
    pub rate_limit: f64,
    pub max_retries: u32,
    /// First retry delay when the server gives no `Retry-After`.
    pub backoff: Duration,
    pub concurrency: usize,
    pub timeout: Duration,
}

impl Default for FetchSettings {
    fn default() -> Self {
        FetchSettings {
            api_base: "https://api.scratch.mit.edu".into(),
            project_base: "https://projects.scratch.mit.edu".into(),
            rate_limit: 1.0,
            max_retries: 3,
            backoff: Duration::from_secs(2),
            concurrency: 4,
            timeout: Duration::from_secs(30),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FetchError {
    #[error("project id must be positive")]
    InvalidId,
    #[error("project {0} not found")]
    NotFound(u64),
    #[error("rate limited (retry after {retry_after:?})")]
    RateLimited { retry_after: Option<Duration> },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("downloaded project is unusable: {0}")]
    Malformed(LoadError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Default)]
pub struct CorpusOptions {
    pub exclude_remixes: bool,
}

/// Hands out permits at most once per interval. A pacer thread offers one
/// permit at a time on a rendezvous channel and sleeps after each handoff,
/// so grants are spaced by at least the interval regardless of how many
/// workers wait. The sleep carries a small margin so that scheduling jitter
/// between a grant and the request going out cannot bring two requests
/// closer than the interval at the server.
struct RateLimiter {
    permits: Option<Receiver<()>>,
}

impl RateLimiter {
    fn new(per_second: f64) -> Self {
        if !(per_second > 0.0 && per_second.is_finite()) {
            return RateLimiter { permits: None };
        }
        let interval = Duration::from_secs_f64(1.0 / per_second);
        let interval = interval + (interval / 10).min(Duration::from_millis(50));
        let (tx, rx) = bounded::<()>(0);
        thread::Builder::new()
            .name("blockcheck-pacer".into())
            .spawn(move || {
                while tx.send(()).is_ok() {
                    thread::sleep(interval);
                }
            })
            .expect("spawn pacer thread");
        RateLimiter { permits: Some(rx) }
    }

    fn acquire(&self) {
        if let Some(rx) = &self.permits {
            // The pacer only stops once every receiver is gone.
            let _ = rx.recv();
        }
    }
}

#[derive(Deserialize)]
struct ApiProject {
    #[serde(default)]
    title: String,
    #[serde(default)]
    author: serde_json::Value,
    #[serde(default)]
    remix: Option<ApiRemix>,
    #[serde(default)]
    project_token: Option<String>,
}

#[derive(Deserialize)]
struct ApiRemix {
    parent: Option<u64>,
}

/// Metadata plus the access token the project host may require.
#[derive(Debug, Clone)]
pub struct MetaResponse {
    pub meta: ProjectMeta,
    pub token: Option<String>,
}

pub struct Fetcher {
    settings: FetchSettings,
    agent: ureq::Agent,
    limiter: RateLimiter,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

impl Fetcher {
    pub fn new(settings: FetchSettings) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(settings.timeout)
            .user_agent(concat!("blockcheck/", env!("CARGO_PKG_VERSION")))
            .build();
        let limiter = RateLimiter::new(settings.rate_limit);
        Fetcher {
            settings,
            agent,
            limiter,
        }
    }

    pub fn settings(&self) -> &FetchSettings {
        &self.settings
    }

    /// GET with pacing and retries on 429/503.
    fn get(&self, id: u64, url: &str) -> Result<ureq::Response, FetchError> {
        let mut attempt = 0;
        loop {
            self.limiter.acquire();
            let err = match self.agent.get(url).call() {
                Ok(resp) => return Ok(resp),
                Err(ureq::Error::Status(404, _)) => return Err(FetchError::NotFound(id)),
                Err(ureq::Error::Status(code @ (429 | 503), resp)) => {
                    let retry_after = resp
                        .header("Retry-After")
                        .and_then(|v| v.trim().parse::<u64>().ok())
                        .map(Duration::from_secs);
                    if code == 429 {
                        FetchError::RateLimited { retry_after }
                    } else {
                        FetchError::Transport(format!("HTTP 503 from {url}"))
                    }
                }
                Err(ureq::Error::Status(code, _)) => return Err(FetchError::Transport(format!("HTTP {code} from {url}"))),
                Err(ureq::Error::Transport(t)) => FetchError::Transport(t.to_string()),
            };
            if attempt >= self.settings.max_retries {
                return Err(err);
            }
            let wait = match &err {
                FetchError::RateLimited { retry_after: Some(d) } => *d,
                _ => self.settings.backoff * 2u32.saturating_pow(attempt),
            };
            thread::sleep(wait);
            attempt += 1;
        }
    }

    pub fn fetch_meta_full(&self, id: u64) -> Result<MetaResponse, FetchError> {
        if id == 0 {
            return Err(FetchError::InvalidId);
        }
        let url = format!("{}/projects/{id}", self.settings.api_base.trim_end_matches('/'));
        let resp = self.get(id, &url)?;
        let body: ApiProject = resp
            .into_json()
            .map_err(|e| FetchError::Transport(format!("bad metadata for {id}: {e}")))?;
        let remix_parent = body.remix.and_then(|r| r.parent).filter(|&p| p != id);
        Ok(MetaResponse {
            meta: ProjectMeta {
                id,
                title: body.title,
                remix_parent,
                author: body.author,
                fetched_at: now(),
            },
            token: body.project_token,
        })
    }

    pub fn fetch_meta(&self, id: u64) -> Result<ProjectMeta, FetchError> {
        self.fetch_meta_full(id).map(|m| m.meta)
    }

    /// Raw `project.json` bytes.
    pub fn download(&self, id: u64, token: Option<&str>) -> Result<Vec<u8>, FetchError> {
        if id == 0 {
            return Err(FetchError::InvalidId);
        }
        let mut url = format!("{}/{id}", self.settings.project_base.trim_end_matches('/'));
        if let Some(t) = token {
            url.push_str("?token=");
            url.push_str(t);
        }
        let resp = self.get(id, &url)?;
        let mut bytes = Vec::new();
        resp.into_reader()
            .take(MAX_PROJECT_BYTES)
            .read_to_end(&mut bytes)
            .map_err(|e| FetchError::Transport(e.to_string()))?;
        Ok(bytes)
    }

    /// Download into `dest/<id>.json`, replacing any earlier copy atomically.
    /// Bytes that do not load are kept as `<id>.json.bad`. The metadata is
    /// looked up first for the host's access token.
    pub fn fetch_project(&self, id: u64, dest: &Path) -> Result<PathBuf, FetchError> {
        let meta = self.fetch_meta_full(id)?;
        self.fetch_project_with(id, meta.token.as_deref(), dest).map(|(path, _)| path)
    }

    fn fetch_project_with(&self, id: u64, token: Option<&str>, dest: &Path) -> Result<(PathBuf, String), FetchError> {
        let bytes = self.download(id, token)?;
        fs::create_dir_all(dest)?;
        let path = dest.join(format!("{id}.json"));
        if let Err(e) = parse_project(&bytes) {
            fs::write(dest.join(format!("{id}.json.bad")), &bytes)?;
            return Err(FetchError::Malformed(e));
        }
        let tmp = dest.join(format!("{id}.json.part"));
        fs::write(&tmp, &bytes)?;
        fs::rename(&tmp, &path)?;
        Ok((path, manifest::checksum(&bytes)))
    }

    fn corpus_entry(&self, id: u64, dest: &Path, options: &CorpusOptions) -> Entry {
        let mut entry = Entry {
            id,
            status: Status::Ok,
            path: None,
            checksum: None,
            meta: None,
            timestamp: now(),
        };
        let result = self.fetch_meta_full(id).and_then(|m| {
            entry.meta = Some(m.meta.clone());
            if let (true, Some(parent)) = (options.exclude_remixes, m.meta.remix_parent) {
                return Ok(Status::SkippedRemix { parent });
            }
            let (_, sum) = self.fetch_project_with(id, m.token.as_deref(), dest)?;
            entry.path = Some(format!("{id}.json"));
            entry.checksum = Some(sum);
            Ok(Status::Ok)
        });
        entry.status = result.unwrap_or_else(|e| Status::Failed { reason: e.to_string() });
        entry.timestamp = now();
        entry
    }

    /// Fetch every id into `dest`, recording outcomes in `dest/manifest.jsonl`.
    ///
    /// Ids already recorded as downloaded whose file still matches its
    /// checksum, and ids already skipped as remixes, are not requested again.
    /// The returned manifest has one entry per distinct input id, in input
    /// order.
    pub fn build_corpus(&self, ids: &[u64], dest: &Path, options: &CorpusOptions) -> io::Result<Manifest> {
        fs::create_dir_all(dest)?;
        let manifest_path = dest.join(manifest::FILE_NAME);
        let previous = Manifest::read(&manifest_path)?;

        let mut seen = HashSet::new();
        let ids: Vec<u64> = ids.iter().copied().filter(|id| seen.insert(*id)).collect();

        let mut results: Vec<Option<Entry>> = vec![None; ids.len()];
        let mut todo = Vec::new();
        for (i, &id) in ids.iter().enumerate() {
            match previous.get(id) {
                Some(e) if reusable(e, dest, options) => results[i] = Some(e.clone()),
                _ => todo.push(i),
            }
        }

        let mut writer = manifest::Writer::open(&manifest_path)?;
        let (job_tx, job_rx) = unbounded::<usize>();
        let (done_tx, done_rx) = unbounded::<(usize, Entry)>();
        for i in &todo {
            job_tx.send(*i).expect("job queue open");
        }
        drop(job_tx);

        let workers = self.settings.concurrency.max(1).min(todo.len().max(1));
        thread::scope(|scope| -> io::Result<()> {
            for _ in 0..workers {
                let job_rx = job_rx.clone();
                let done_tx = done_tx.clone();
                let ids = &ids;
                scope.spawn(move || {
                    for i in job_rx.iter() {
                        let entry = self.corpus_entry(ids[i], dest, options);
                        if done_tx.send((i, entry)).is_err() {
                            break;
                        }
                    }
                });
            }
            drop(done_tx);

            // Single writer: records are appended in input order as soon as
            // every earlier id has finished.
            let mut pending = BTreeMap::new();
            let mut next = 0;
            for (i, entry) in done_rx.iter() {
                pending.insert(i, entry);
                while next < todo.len() {
                    let Some(entry) = pending.remove(&todo[next]) else { break };
                    writer.append(&entry)?;
                    results[todo[next]] = Some(entry);
                    next += 1;
                }
            }
            Ok(())
        })?;

        Ok(Manifest {
            entries: results.into_iter().map(|e| e.expect("every id resolved")).collect(),
        })
    }
}

fn reusable(entry: &Entry, dest: &Path, options: &CorpusOptions) -> bool {
    match &entry.status {
        Status::Ok => match (&entry.path, &entry.checksum) {
            (Some(p), Some(sum)) => manifest::file_checksum(&dest.join(p)).is_ok_and(|actual| &actual == sum),
            _ => false,
        },
        Status::SkippedRemix { .. } => options.exclude_remixes,
        Status::Failed { .. } => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Instant;

    #[test]
    fn id_zero_is_rejected_without_network() {
        let f = Fetcher::new(FetchSettings {
            api_base: "http://127.0.0.1:9".into(),
            project_base: "http://127.0.0.1:9".into(),
            rate_limit: 0.0,
            ..Default::default()
        });
        assert!(matches!(f.fetch_meta(0), Err(FetchError::InvalidId)));
        assert!(matches!(f.download(0, None), Err(FetchError::InvalidId)));
    }

    #[test]
    fn limiter_spaces_grants() {
        let limiter = RateLimiter::new(10.0);
        let mut times = Vec::new();
        thread::scope(|s| {
            let (tx, rx) = unbounded();
            for _ in 0..3 {
                let tx = tx.clone();
                let limiter = &limiter;
                s.spawn(move || {
                    for _ in 0..2 {
                        limiter.acquire();
                        tx.send(Instant::now()).unwrap();
                    }
                });
            }
            drop(tx);
            times.extend(rx.iter());
        });
        times.sort();
        for w in times.windows(2) {
            assert!(w[1] - w[0] >= Duration::from_millis(100), "{:?}", w[1] - w[0]);
        }
    }
}
