mod common;

use std::collections::HashMap;
use std::fs;
use std::time::Duration;

use blockcheck::archive::load_path;
use blockcheck::fetcher::{CorpusOptions, FetchError, Fetcher};
use blockcheck::manifest::{self, Manifest, Status};
use common::{Scenario, Stub, EMPTY_PROJECT};

fn ok() -> Scenario {
    Scenario::Ok(EMPTY_PROJECT.into())
}

fn stub(pairs: Vec<(u64, Scenario)>) -> Stub {
    Stub::start(pairs.into_iter().collect::<HashMap<_, _>>())
}

#[test]
fn metadata_reports_remix_parent() {
    let s = stub(vec![
        (10, ok()),
        (11, Scenario::Remix { parent: 10, body: EMPTY_PROJECT.into() }),
    ]);
    let f = Fetcher::new(s.settings(0.0));
    assert_eq!(f.fetch_meta(10).unwrap().remix_parent, None);
    let remix = f.fetch_meta(11).unwrap();
    assert_eq!(remix.remix_parent, Some(10));
    assert_eq!(remix.title, "Project 11");
}

#[test]
fn fetch_project_writes_loadable_file() {
    let s = stub(vec![(10, ok())]);
    let dir = tempfile::tempdir().unwrap();
    let path = Fetcher::new(s.settings(0.0)).fetch_project(10, dir.path()).unwrap();
    assert_eq!(path, dir.path().join("10.json"));
    assert_eq!(load_path(&path).unwrap().targets.len(), 1);
    // Idempotent.
    Fetcher::new(s.settings(0.0)).fetch_project(10, dir.path()).unwrap();
    assert!(!dir.path().join("10.json.part").exists());
}

#[test]
fn missing_project_is_not_found() {
    let s = stub(vec![]);
    let f = Fetcher::new(s.settings(0.0));
    assert!(matches!(f.fetch_meta(404), Err(FetchError::NotFound(404))));
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(f.fetch_project(404, dir.path()), Err(FetchError::NotFound(404))));
}

#[test]
fn rate_limit_response_is_retried_after_the_advertised_delay() {
    let s = stub(vec![(12, Scenario::RateLimitedOnce { retry_after: 1, body: EMPTY_PROJECT.into() })]);
    let f = Fetcher::new(s.settings(0.0));
    assert_eq!(f.fetch_meta(12).unwrap().remix_parent, None);
    let hits = s.hits("/api/projects/12");
    assert_eq!(hits.len(), 2);
    assert!(hits[1].at - hits[0].at >= Duration::from_secs(1));
}

#[test]
fn rate_limit_without_retries_surfaces() {
    let s = stub(vec![(12, Scenario::RateLimitedOnce { retry_after: 7, body: EMPTY_PROJECT.into() })]);
    let mut settings = s.settings(0.0);
    settings.max_retries = 0;
    match Fetcher::new(settings).fetch_meta(12) {
        Err(FetchError::RateLimited { retry_after }) => assert_eq!(retry_after, Some(Duration::from_secs(7))),
        other => panic!("{other:?}"),
    }
}

#[test]
fn malformed_download_is_kept_for_triage() {
    let s = stub(vec![(13, Scenario::Malformed)]);
    let dir = tempfile::tempdir().unwrap();
    let err = Fetcher::new(s.settings(0.0)).fetch_project(13, dir.path()).unwrap_err();
    assert!(matches!(err, FetchError::Malformed(_)));
    assert!(dir.path().join("13.json.bad").exists());
    assert!(!dir.path().join("13.json").exists());
}

#[test]
fn corpus_skips_remixes_and_records_failures() {
    let s = stub(vec![
        (1, ok()),
        (2, Scenario::Remix { parent: 1, body: EMPTY_PROJECT.into() }),
        (3, ok()),
    ]);
    let dir = tempfile::tempdir().unwrap();
    let f = Fetcher::new(s.settings(0.0));
    let m = f
        .build_corpus(&[1, 2, 404, 3, 1], dir.path(), &CorpusOptions { exclude_remixes: true })
        .unwrap();
    let statuses: Vec<_> = m.entries.iter().map(|e| (e.id, e.status.clone())).collect();
    assert_eq!(statuses[0], (1, Status::Ok));
    assert_eq!(statuses[1], (2, Status::SkippedRemix { parent: 1 }));
    assert!(matches!(&statuses[2], (404, Status::Failed { reason }) if reason.contains("not found")));
    assert_eq!(statuses[3], (3, Status::Ok));
    assert_eq!(statuses.len(), 4);
    assert!(s.hits("/host/2").is_empty());

    // The manifest on disk replays to the same thing.
    let replay = Manifest::read(&dir.path().join(manifest::FILE_NAME)).unwrap();
    assert_eq!(replay, m);
    for (_, path) in replay.ok_paths(dir.path()) {
        assert!(path.exists());
    }
}

#[test]
fn remixes_are_kept_unless_excluded() {
    let s = stub(vec![(2, Scenario::Remix { parent: 1, body: EMPTY_PROJECT.into() })]);
    let dir = tempfile::tempdir().unwrap();
    let m = Fetcher::new(s.settings(0.0))
        .build_corpus(&[2], dir.path(), &CorpusOptions::default())
        .unwrap();
    assert!(m.entries[0].is_ok());
    assert_eq!(m.entries[0].meta.as_ref().unwrap().remix_parent, Some(1));
}

#[test]
fn empty_id_list_gives_empty_manifest() {
    let s = stub(vec![]);
    let dir = tempfile::tempdir().unwrap();
    let m = Fetcher::new(s.settings(0.0))
        .build_corpus(&[], dir.path(), &CorpusOptions::default())
        .unwrap();
    assert!(m.entries.is_empty());
    assert!(s.log().is_empty());
}

#[test]
fn rerun_downloads_only_what_is_missing_or_changed() {
    let s = stub(vec![(1, ok()), (2, ok()), (3, ok())]);
    let dir = tempfile::tempdir().unwrap();
    let f = Fetcher::new(s.settings(0.0));
    let opts = CorpusOptions::default();
    f.build_corpus(&[1, 2, 3, 4], dir.path(), &opts).unwrap();

    s.clear_log();
    let again = f.build_corpus(&[1, 2, 3, 4], dir.path(), &opts).unwrap();
    assert!(again.entries[..3].iter().all(|e| e.is_ok()));
    // Only the failure is retried.
    let urls: Vec<_> = s.log().into_iter().map(|h| h.url).collect();
    assert_eq!(urls, ["/api/projects/4"]);

    // A tampered file no longer matches its checksum and is fetched again.
    fs::write(dir.path().join("2.json"), b"{}").unwrap();
    s.clear_log();
    f.build_corpus(&[1, 2, 3], dir.path(), &opts).unwrap();
    assert_eq!(s.hits("/host/").len(), 1);
    assert_eq!(s.hits("/host/2").len(), 1);
    assert_eq!(load_path(&dir.path().join("2.json")).unwrap().targets.len(), 1);
}

#[test]
fn requests_are_paced() {
    let ids: Vec<u64> = (1..=4).collect();
    let s = stub(ids.iter().map(|&i| (i, ok())).collect());
    let dir = tempfile::tempdir().unwrap();
    let rate = 10.0;
    Fetcher::new(s.settings(rate))
        .build_corpus(&ids, dir.path(), &CorpusOptions::default())
        .unwrap();
    let log = s.log();
    assert_eq!(log.len(), 8);
    let interval = Duration::from_secs_f64(1.0 / rate);
    for w in log.windows(2) {
        assert!(w[1].at - w[0].at >= interval, "{:?}", w[1].at - w[0].at);
    }
}
