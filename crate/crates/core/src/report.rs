//! Per-project analysis results and their aggregation over a corpus.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ast::build_ast;
use crate::detectors::Finding;
use crate::metrics::{project_metrics, ProjectMetrics};
use crate::model::{parse_project, RawProject};
use crate::registry::{DetectorDescriptor, Registry, RegistryError, Selection};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Status {
    Ok,
    ParseError { message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub project: String,
    pub status: Status,
    pub findings: Vec<Finding>,
    pub metrics: ProjectMetrics,
}

impl AnalysisReport {
    pub fn parse_error(project: impl Into<String>, message: impl ToString) -> Self {
        AnalysisReport {
            project: project.into(),
            status: Status::ParseError {
                message: message.to_string(),
            },
            findings: Vec::new(),
            metrics: ProjectMetrics::default(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }
}

/// Build the tree for a loaded project and run the selected detectors on it.
/// A project whose tree cannot be built is reported with a parse-error
/// status; an unknown detector id is an error for the caller.
pub fn analyze_project(
    name: &str,
    project: &RawProject,
    registry: &Registry,
    selection: &Selection,
) -> Result<AnalysisReport, RegistryError> {
    registry.check(selection)?;
    let program = match build_ast(project) {
        Ok(p) => p,
        Err(e) => return Ok(AnalysisReport::parse_error(name, e)),
    };
    Ok(AnalysisReport {
        project: name.into(),
        status: Status::Ok,
        findings: registry.run(&program, selection)?,
        metrics: project_metrics(&program),
    })
}

/// `analyze_project` on the bytes of a project.json.
pub fn analyze_json(
    name: &str,
    bytes: &[u8],
    registry: &Registry,
    selection: &Selection,
) -> Result<AnalysisReport, RegistryError> {
    registry.check(selection)?;
    match parse_project(bytes) {
        Ok(project) => analyze_project(name, &project, registry, selection),
        Err(e) => Ok(AnalysisReport::parse_error(name, e)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorStats {
    pub detector: String,
    /// Projects with at least one finding of this detector.
    pub affected_projects: u64,
    pub total_instances: u64,
    /// Sum of WMC over affected projects; the average is derived from it.
    pub affected_wmc_sum: u64,
}

impl DetectorStats {
    pub fn avg_wmc_of_affected(&self) -> f64 {
        if self.affected_projects == 0 {
            0.0
        } else {
            self.affected_wmc_sum as f64 / self.affected_projects as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub rows: Vec<DetectorStats>,
    pub projects_analyzed: u64,
    pub projects_with_findings: u64,
    pub total_findings: u64,
    pub parse_errors: u64,
}

impl CorpusStats {
    /// Empty table with one row per descriptor, in the given order.
    pub fn new(descriptors: &[DetectorDescriptor]) -> Self {
        CorpusStats {
            rows: descriptors
                .iter()
                .map(|d| DetectorStats {
                    detector: d.id.into(),
                    affected_projects: 0,
                    total_instances: 0,
                    affected_wmc_sum: 0,
                })
                .collect(),
            projects_analyzed: 0,
            projects_with_findings: 0,
            total_findings: 0,
            parse_errors: 0,
        }
    }

    /// Fold one report in. Parse errors count only towards `parse_errors`.
    pub fn add(&mut self, report: &AnalysisReport) {
        if !report.is_ok() {
            self.parse_errors += 1;
            return;
        }
        self.projects_analyzed += 1;
        if !report.findings.is_empty() {
            self.projects_with_findings += 1;
        }
        self.total_findings += report.findings.len() as u64;
        for row in &mut self.rows {
            let n = report.findings.iter().filter(|f| f.detector == row.detector).count() as u64;
            if n > 0 {
                row.affected_projects += 1;
                row.total_instances += n;
                row.affected_wmc_sum += report.metrics.wmc;
            }
        }
    }

    pub fn from_reports<'r>(
        descriptors: &[DetectorDescriptor],
        reports: impl IntoIterator<Item = &'r AnalysisReport>,
    ) -> Self {
        let mut stats = Self::new(descriptors);
        for r in reports {
            stats.add(r);
        }
        stats
    }

    pub fn row(&self, detector: &str) -> Option<&DetectorStats> {
        self.rows.iter().find(|r| r.detector == detector)
    }
}
