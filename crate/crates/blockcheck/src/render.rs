//! Text, JSON and CSV output for reports, corpus statistics and the detector
//! catalogue.

use std::fmt::Write as _;

use blockcheck_core::ast::{Locator, UnitRef};
use blockcheck_core::{AnalysisReport, CorpusStats, DetectorDescriptor, DetectorStats, Status};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

/// Average WMC as printed everywhere: two decimals. JSON carries the number
/// this string denotes so all three formats agree.
pub fn avg_wmc_2dp(row: &DetectorStats) -> String {
    format!("{:.2}", row.avg_wmc_of_affected())
}

#[derive(Serialize)]
struct StatsRow<'a> {
    pattern: &'a str,
    projects: u64,
    instances: u64,
    avg_wmc: f64,
}

#[derive(Serialize)]
struct StatsDoc<'a> {
    projects_analyzed: u64,
    projects_with_findings: u64,
    total_findings: u64,
    parse_errors: u64,
    patterns: Vec<StatsRow<'a>>,
}

pub fn render_stats(stats: &CorpusStats, format: Format) -> String {
    match format {
        Format::Csv => stats_csv(stats),
        Format::Json => {
            let doc = StatsDoc {
                projects_analyzed: stats.projects_analyzed,
                projects_with_findings: stats.projects_with_findings,
                total_findings: stats.total_findings,
                parse_errors: stats.parse_errors,
                patterns: stats
                    .rows
                    .iter()
                    .map(|r| StatsRow {
                        pattern: &r.detector,
                        projects: r.affected_projects,
                        instances: r.total_instances,
                        avg_wmc: avg_wmc_2dp(r).parse().expect("formatted float"),
                    })
                    .collect(),
            };
            let mut out = serde_json::to_string_pretty(&doc).expect("stats serialize");
            out.push('\n');
            out
        }
        Format::Text => stats_text(stats),
    }
}

fn stats_csv(stats: &CorpusStats) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["pattern", "projects", "instances", "avg_wmc"]).expect("in-memory csv");
    for r in &stats.rows {
        w.write_record([
            r.detector.clone(),
            r.affected_projects.to_string(),
            r.total_instances.to_string(),
            avg_wmc_2dp(r),
        ])
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

fn stats_text(stats: &CorpusStats) -> String {
    let width = stats.rows.iter().map(|r| r.detector.len()).max().unwrap_or(0).max("pattern".len());
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$}  {:>8}  {:>9}  {:>7}", "pattern", "projects", "instances", "avg_wmc");
    for r in &stats.rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>8}  {:>9}  {:>7}",
            r.detector,
            r.affected_projects,
            r.total_instances,
            avg_wmc_2dp(r)
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "projects analyzed:      {}", stats.projects_analyzed);
    let _ = writeln!(out, "projects with findings: {}", stats.projects_with_findings);
    let _ = writeln!(out, "total findings:         {}", stats.total_findings);
    let _ = writeln!(out, "parse errors:           {}", stats.parse_errors);
    out
}

fn unit_label(unit: &UnitRef) -> String {
    match unit {
        UnitRef::Script(i) => format!("script:{i}"),
        UnitRef::Procedure(code) => format!("procedure:{code}"),
    }
}

fn path_label(loc: &Locator) -> String {
    loc.path.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("/")
}

/// One JSON object per line, for report streams.
pub fn report_json_line(report: &AnalysisReport) -> String {
    serde_json::to_string(report).expect("report serialize")
}

pub fn render_report(report: &AnalysisReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut out = serde_json::to_string_pretty(report).expect("report serialize");
            out.push('\n');
            out
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["project", "detector", "actor", "unit", "path", "block_id", "message"])
                .expect("in-memory csv");
            for f in &report.findings {
                w.write_record([
                    report.project.as_str(),
                    &f.detector,
                    &f.actor,
                    &unit_label(&f.locator.unit),
                    &path_label(&f.locator),
                    &f.locator.block_id,
                    &f.message,
                ])
                .expect("in-memory csv");
            }
            String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
        }
        Format::Text => {
            let mut out = String::new();
            match &report.status {
                Status::ParseError { message } => {
                    let _ = writeln!(out, "{}: parse error: {message}", report.project);
                }
                Status::Ok => {
                    let _ = writeln!(
                        out,
                        "{}: {} finding{}, wmc {}",
                        report.project,
                        report.findings.len(),
                        if report.findings.len() == 1 { "" } else { "s" },
                        report.metrics.wmc
                    );
                    for f in &report.findings {
                        let _ = writeln!(
                            out,
                            "  {}  {} {} [{}] block {}: {}",
                            f.detector,
                            f.actor,
                            unit_label(&f.locator.unit),
                            path_label(&f.locator),
                            f.locator.block_id,
                            f.message
                        );
                    }
                }
            }
            out
        }
    }
}

pub fn render_detectors(descriptors: &[DetectorDescriptor], format: Format) -> String {
    match format {
        Format::Json => {
            let mut out = serde_json::to_string_pretty(descriptors).expect("descriptor serialize");
            out.push('\n');
            out
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["id", "category", "name", "description"]).expect("in-memory csv");
            for d in descriptors {
                w.write_record([d.id, d.category.as_str(), d.name, d.description])
                    .expect("in-memory csv");
            }
            String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
        }
        Format::Text => {
            let width = descriptors.iter().map(|d| d.id.len()).max().unwrap_or(0);
            let mut out = String::new();
            for d in descriptors {
                let _ = writeln!(out, "{:<8} {:<width$}  {}", d.category.as_str(), d.id, d.name);
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use blockcheck_core::{list_detectors, Finding, ProjectMetrics};

    fn sample_stats() -> CorpusStats {
        let mut stats = CorpusStats::new(&list_detectors());
        let row = stats.rows.iter_mut().find(|r| r.detector == "stuttering-movement").unwrap();
        row.affected_projects = 3;
        row.total_instances = 6;
        row.affected_wmc_sum = 10;
        stats.projects_analyzed = 4;
        stats.projects_with_findings = 3;
        stats.total_findings = 6;
        stats
    }

    #[test]
    fn zero_stats_csv_has_header_and_one_row_per_detector() {
        let csv = render_stats(&CorpusStats::new(&list_detectors()), Format::Csv);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 26);
        assert_eq!(lines[0], "pattern,projects,instances,avg_wmc");
        assert!(lines[1..].iter().all(|l| l.ends_with(",0,0,0.00")));
    }

    #[test]
    fn formats_agree_on_numbers() {
        let stats = sample_stats();
        let csv = render_stats(&stats, Format::Csv);
        assert!(csv.contains("stuttering-movement,3,6,3.33\n"));

        let json: serde_json::Value = serde_json::from_str(&render_stats(&stats, Format::Json)).unwrap();
        let row = json["patterns"].as_array().unwrap().iter().find(|r| r["pattern"] == "stuttering-movement").unwrap();
        assert_eq!(row["projects"], 3);
        assert_eq!(row["instances"], 6);
        assert_eq!(row["avg_wmc"].as_f64().unwrap(), 3.33);

        let text = render_stats(&stats, Format::Text);
        let line = text.lines().find(|l| l.starts_with("stuttering-movement ")).unwrap();
        assert_eq!(line.split_whitespace().collect::<Vec<_>>(), ["stuttering-movement", "3", "6", "3.33"]);
    }

    #[test]
    fn report_json_has_locator() {
        let loc = Locator {
            actor: "Cat".into(),
            unit: UnitRef::Script(0),
            path: vec![0, 1],
            block_id: "abc".into(),
        };
        let report = AnalysisReport {
            project: "p".into(),
            status: Status::Ok,
            findings: vec![Finding::new("comparing-literals", loc, "always false")],
            metrics: ProjectMetrics::default(),
        };
        let v: serde_json::Value = serde_json::from_str(&render_report(&report, Format::Json)).unwrap();
        let findings = v["findings"].as_array().unwrap();
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0]["detector"], "comparing-literals");
        assert_eq!(findings[0]["actor"], "Cat");
        assert_eq!(findings[0]["locator"]["block_id"], "abc");
        assert_eq!(findings[0]["locator"]["path"], serde_json::json!([0, 1]));
        assert!(render_report(&report, Format::Csv).contains("p,comparing-literals,Cat,script:0,0/1,abc,always false"));
    }
}
