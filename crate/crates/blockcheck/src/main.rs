use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use anyhow::Context as _;
use clap::{Parser, Subcommand};

use blockcheck::config::Config;
use blockcheck::corpus::{self, AnalyzeOptions, WORKER_STACK};
use blockcheck::fetcher::{CorpusOptions, Fetcher};
use blockcheck::manifest::Status as FetchStatus;
use blockcheck::render::{self, Format};
use blockcheck_core::{analyze_json, AnalysisReport, Registry, Selection};

/// Exit code when the tool ran and found nothing.
const CLEAN: u8 = 0;
/// Exit code when the tool ran and reported findings.
const FINDINGS: u8 = 1;
/// Exit code for usage, input and I/O problems.
const TROUBLE: u8 = 2;

#[derive(Parser)]
#[command(name = "blockcheck", version, about = "Find bug patterns in Scratch 3 projects")]
struct Cli {
    /// Settings file (TOML). Defaults to $BLOCKCHECK_CONFIG if set.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyse one project: a .json/.sb3 file, or a project id to download.
    Analyze {
        target: String,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        /// Comma-separated detector ids (default: all).
        #[arg(long, default_value = "")]
        detectors: String,
    },
    /// Analyse every project in a directory or manifest and aggregate.
    Corpus {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        /// Analysis workers (default: config, then CPU count).
        #[arg(long)]
        jobs: Option<usize>,
        /// Write one JSON report per project to this file.
        #[arg(long)]
        reports: Option<PathBuf>,
        #[arg(long, default_value = "")]
        detectors: String,
    },
    /// Download projects into a corpus directory with a resumable manifest.
    Fetch {
        #[arg(required = true)]
        ids: Vec<u64>,
        #[arg(long, default_value = "corpus")]
        out: PathBuf,
        #[arg(long)]
        exclude_remixes: bool,
    },
    /// Inspect the detector catalogue.
    Detectors {
        #[command(subcommand)]
        action: DetectorsAction,
    },
}

#[derive(Subcommand)]
enum DetectorsAction {
    List {
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let worker = thread::Builder::new()
        .name("blockcheck-main".into())
        .stack_size(WORKER_STACK)
        .spawn(move || run(cli));
    let code = match worker.map(|h| h.join()) {
        Ok(Ok(Ok(code))) => code,
        Ok(Ok(Err(e))) => {
            eprintln!("blockcheck: {e:#}");
            TROUBLE
        }
        Ok(Err(_)) | Err(_) => TROUBLE,
    };
    ExitCode::from(code)
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let config = Config::from_env(cli.config.as_deref())?;
    let registry = Registry::builtin();
    match cli.command {
        Command::Analyze {
            target,
            format,
            detectors,
        } => analyze(&config, &registry, &target, format, &Selection::parse(&detectors)),
        Command::Corpus {
            input,
            format,
            jobs,
            reports,
            detectors,
        } => {
            let options = AnalyzeOptions {
                jobs: jobs.unwrap_or(config.jobs),
                selection: Selection::parse(&detectors),
            };
            corpus(&registry, &input, format, &options, reports.as_deref())
        }
        Command::Fetch {
            ids,
            out,
            exclude_remixes,
        } => fetch(&config, &ids, &out, exclude_remixes),
        Command::Detectors {
            action: DetectorsAction::List { format },
        } => {
            print!("{}", render::render_detectors(&registry.descriptors(), format));
            Ok(CLEAN)
        }
    }
}

fn analyze(config: &Config, registry: &Registry, target: &str, format: Format, selection: &Selection) -> anyhow::Result<u8> {
    let path = Path::new(target);
    let report = if path.exists() {
        corpus::analyze_file(target, path, registry, selection)?
    } else if let Ok(id) = target.parse::<u64>() {
        download_and_analyze(config, registry, id, selection)?
    } else {
        anyhow::bail!("input not found: {target}");
    };
    print!("{}", render::render_report(&report, format));
    Ok(exit_code(&report))
}

fn download_and_analyze(config: &Config, registry: &Registry, id: u64, selection: &Selection) -> anyhow::Result<AnalysisReport> {
    registry.check(selection)?;
    let fetcher = Fetcher::new(config.fetch.clone());
    let meta = fetcher.fetch_meta_full(id).with_context(|| format!("fetching metadata of {id}"))?;
    let bytes = fetcher
        .download(id, meta.token.as_deref())
        .with_context(|| format!("downloading project {id}"))?;
    Ok(analyze_json(&id.to_string(), &bytes, registry, selection)?)
}

fn exit_code(report: &AnalysisReport) -> u8 {
    if !report.is_ok() {
        TROUBLE
    } else if report.findings.is_empty() {
        CLEAN
    } else {
        FINDINGS
    }
}

fn corpus(
    registry: &Registry,
    input: &Path,
    format: Format,
    options: &AnalyzeOptions,
    reports: Option<&Path>,
) -> anyhow::Result<u8> {
    let items = corpus::discover(input).with_context(|| format!("reading corpus {}", input.display()))?;
    let mut sink = match reports {
        Some(p) => Some(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => None,
    };
    let stats = corpus::analyze_corpus(&items, registry, options, |report| {
        if let Some(w) = sink.as_mut() {
            writeln!(w, "{}", render::report_json_line(report))?;
        }
        Ok(())
    })?;
    if let Some(mut w) = sink {
        w.flush()?;
    }
    let mut stdout = io::stdout().lock();
    stdout.write_all(render::render_stats(&stats, format).as_bytes())?;
    stdout.flush()?;
    Ok(if stats.total_findings > 0 { FINDINGS } else { CLEAN })
}

fn fetch(config: &Config, ids: &[u64], out: &Path, exclude_remixes: bool) -> anyhow::Result<u8> {
    let fetcher = Fetcher::new(config.fetch.clone());
    let manifest = fetcher
        .build_corpus(ids, out, &CorpusOptions { exclude_remixes })
        .with_context(|| format!("writing corpus to {}", out.display()))?;
    let (mut ok, mut skipped, mut failed) = (0, 0, 0);
    for entry in &manifest.entries {
        match &entry.status {
            FetchStatus::Ok => ok += 1,
            FetchStatus::SkippedRemix { .. } => skipped += 1,
            FetchStatus::Failed { reason } => {
                failed += 1;
                eprintln!("{}: {reason}", entry.id);
            }
        }
    }
    println!("ok {ok}, skipped remixes {skipped}, failed {failed}");
    Ok(if failed > 0 { TROUBLE } else { CLEAN })
}
