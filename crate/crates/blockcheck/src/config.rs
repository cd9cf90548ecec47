//! Settings from an optional TOML file, overridden by environment variables.
//!
//! ```toml
//! api_url = "https://api.scratch.mit.edu"
//! project_url = "https://projects.scratch.mit.edu"
//! rate_limit = 1.0
//! jobs = 8
//! ```

use std::path::{Path, PathBuf};
use std::time::Duration;
use std::{fs, io};

use serde::Deserialize;

use crate::fetcher::FetchSettings;

pub const ENV_CONFIG: &str = "BLOCKCHECK_CONFIG";
pub const ENV_API_URL: &str = "BLOCKCHECK_API_URL";
pub const ENV_PROJECT_URL: &str = "BLOCKCHECK_PROJECT_URL";
pub const ENV_RATE_LIMIT: &str = "BLOCKCHECK_RATE_LIMIT";
pub const ENV_JOBS: &str = "BLOCKCHECK_JOBS";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("bad config file {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("bad value for {var}: {value:?}")]
    Env { var: &'static str, value: String },
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    api_url: Option<String>,
    project_url: Option<String>,
    rate_limit: Option<f64>,
    jobs: Option<usize>,
    concurrency: Option<usize>,
    max_retries: Option<u32>,
    timeout_secs: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub fetch: FetchSettings,
    /// Analysis workers.
    pub jobs: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            fetch: FetchSettings::default(),
            jobs: default_jobs(),
        }
    }
}

pub fn default_jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

impl Config {
    /// Load from the process environment. `file` wins over `BLOCKCHECK_CONFIG`.
    pub fn from_env(file: Option<&Path>) -> Result<Self, ConfigError> {
        Self::load(file, |k| std::env::var(k).ok())
    }

    pub fn load(file: Option<&Path>, env: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let mut config = Config::default();
        let file = file.map(Path::to_path_buf).or_else(|| env(ENV_CONFIG).map(PathBuf::from));
        if let Some(path) = file {
            let text = fs::read_to_string(&path).map_err(|source| ConfigError::Read {
                path: path.clone(),
                source,
            })?;
            let parsed: FileConfig = toml::from_str(&text).map_err(|source| ConfigError::Parse { path, source })?;
            config.apply(parsed);
        }

        if let Some(v) = env(ENV_API_URL) {
            config.fetch.api_base = v;
        }
        if let Some(v) = env(ENV_PROJECT_URL) {
            config.fetch.project_base = v;
        }
        if let Some(v) = env(ENV_RATE_LIMIT) {
            config.fetch.rate_limit = v.trim().parse().map_err(|_| ConfigError::Env {
                var: ENV_RATE_LIMIT,
                value: v.clone(),
            })?;
        }
        if let Some(v) = env(ENV_JOBS) {
            config.jobs = match v.trim().parse() {
                Ok(n) if n > 0 => n,
                _ => return Err(ConfigError::Env { var: ENV_JOBS, value: v }),
            };
        }
        Ok(config)
    }

    fn apply(&mut self, file: FileConfig) {
        if let Some(v) = file.api_url {
            self.fetch.api_base = v;
        }
        if let Some(v) = file.project_url {
            self.fetch.project_base = v;
        }
        if let Some(v) = file.rate_limit {
            self.fetch.rate_limit = v;
        }
        if let Some(v) = file.jobs.filter(|&n| n > 0) {
            self.jobs = v;
        }
        if let Some(v) = file.concurrency.filter(|&n| n > 0) {
            self.fetch.concurrency = v;
        }
        if let Some(v) = file.max_retries {
            self.fetch.max_retries = v;
        }
        if let Some(v) = file.timeout_secs {
            self.fetch.timeout = Duration::from_secs(v);
        }
    }
}
