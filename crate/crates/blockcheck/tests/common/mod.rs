//! Local stand-in for the metadata API and the project host.
//!
//! Metadata lives under `/api/projects/<id>`, project bodies under
//! `/host/<id>?token=<token>`. Every request is logged with its arrival time.

#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use blockcheck::fetcher::FetchSettings;
use tiny_http::{Header, Response, Server};

pub const EMPTY_PROJECT: &str = r#"{"targets":[{"isStage":true,"name":"Stage","variables":{},"lists":{},"broadcasts":{},"blocks":{},"comments":{},"costumes":[],"sounds":[]}],"monitors":[],"extensions":[],"meta":{"semver":"3.0.0","vm":"0.2.0","agent":"stub"}}"#;

#[derive(Debug, Clone)]
pub enum Scenario {
    /// Regular project with this body.
    Ok(String),
    /// Remix of `parent`.
    Remix { parent: u64, body: String },
    NotFound,
    /// First metadata request answers 429, later ones succeed.
    RateLimitedOnce { retry_after: u64, body: String },
    /// Metadata is fine but the project body is not a Scratch 3 project.
    Malformed,
}

#[derive(Debug, Clone)]
pub struct Hit {
    pub at: Instant,
    pub url: String,
}

pub struct Stub {
    pub base: String,
    log: Arc<Mutex<Vec<Hit>>>,
    server: Arc<Server>,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

fn token(id: u64) -> String {
    format!("tok{id}")
}

fn json_header() -> Header {
    Header::from_bytes("Content-Type", "application/json").unwrap()
}

impl Stub {
    pub fn start(scenarios: HashMap<u64, Scenario>) -> Stub {
        let server = Arc::new(Server::http("127.0.0.1:0").expect("bind stub"));
        let base = format!("http://{}", server.server_addr().to_ip().unwrap());
        let log = Arc::new(Mutex::new(Vec::new()));
        let stop = Arc::new(AtomicBool::new(false));
        let handle = {
            let (server, log, stop) = (server.clone(), log.clone(), stop.clone());
            thread::spawn(move || {
                let mut limited: HashMap<u64, bool> = HashMap::new();
                for req in server.incoming_requests() {
                    if stop.load(Ordering::SeqCst) {
                        break;
                    }
                    let url = req.url().to_string();
                    log.lock().unwrap().push(Hit { at: Instant::now(), url: url.clone() });
                    let resp = respond(&scenarios, &mut limited, &url);
                    let _ = req.respond(resp);
                }
            })
        };
        Stub {
            base,
            log,
            server,
            stop,
            handle: Some(handle),
        }
    }

    pub fn settings(&self, rate_limit: f64) -> FetchSettings {
        FetchSettings {
            api_base: format!("{}/api", self.base),
            project_base: format!("{}/host", self.base),
            rate_limit,
            max_retries: 2,
            backoff: Duration::from_millis(50),
            concurrency: 4,
            timeout: Duration::from_secs(10),
        }
    }

    pub fn log(&self) -> Vec<Hit> {
        self.log.lock().unwrap().clone()
    }

    pub fn clear_log(&self) {
        self.log.lock().unwrap().clear();
    }

    pub fn hits(&self, prefix: &str) -> Vec<Hit> {
        self.log().into_iter().filter(|h| h.url.starts_with(prefix)).collect()
    }
}

impl Drop for Stub {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        self.server.unblock();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn respond(
    scenarios: &HashMap<u64, Scenario>,
    limited: &mut HashMap<u64, bool>,
    url: &str,
) -> Response<std::io::Cursor<Vec<u8>>> {
    let (path, query) = url.split_once('?').unwrap_or((url, ""));
    let not_found = || Response::from_string("not found").with_status_code(404);
    let (kind, id) = if let Some(rest) = path.strip_prefix("/api/projects/") {
        ("meta", rest)
    } else if let Some(rest) = path.strip_prefix("/host/") {
        ("body", rest)
    } else {
        return not_found();
    };
    let Ok(id) = id.parse::<u64>() else { return not_found() };
    let Some(scenario) = scenarios.get(&id) else { return not_found() };

    if kind == "meta" {
        let parent = match scenario {
            Scenario::NotFound => return not_found(),
            Scenario::RateLimitedOnce { retry_after, .. } if !limited.contains_key(&id) => {
                limited.insert(id, true);
                return Response::from_string("slow down")
                    .with_status_code(429)
                    .with_header(Header::from_bytes("Retry-After", retry_after.to_string()).unwrap());
            }
            Scenario::Remix { parent, .. } => serde_json::json!(parent),
            _ => serde_json::Value::Null,
        };
        let body = serde_json::json!({
            "id": id,
            "title": format!("Project {id}"),
            "author": {"username": "stub"},
            "remix": {"parent": parent, "root": parent},
            "project_token": token(id),
        });
        return Response::from_string(body.to_string()).with_header(json_header());
    }

    if query != format!("token={}", token(id)) {
        return not_found();
    }
    let body = match scenario {
        Scenario::Ok(body) | Scenario::Remix { body, .. } | Scenario::RateLimitedOnce { body, .. } => body.clone(),
        Scenario::Malformed => "<html>oops</html>".to_string(),
        Scenario::NotFound => return not_found(),
    };
    Response::from_string(body).with_header(json_header())
}

/// Directory of the shared fixtures.
pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}
