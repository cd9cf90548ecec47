//! Static analysis for Scratch 3 projects: a typed view of project.json, an
//! abstract syntax tree over it, bug-pattern detectors and complexity
//! metrics.
//!
//! ```
//! use blockcheck_core::{analyze_json, Registry, Selection};
//!
//! let json = br#"{"targets":[{"isStage":true,"name":"Stage","variables":{},"lists":{},
//!   "broadcasts":{},"blocks":{},"costumes":[],"sounds":[]}],
//!   "monitors":[],"extensions":[],"meta":{"semver":"3.0.0"}}"#;
//! let report = analyze_json("empty", json, &Registry::builtin(), &Selection::All).unwrap();
//! assert!(report.findings.is_empty());
//! assert_eq!(report.metrics.wmc, 0);
//! ```

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ast;
pub mod detectors;
pub mod metrics;
pub mod model;
pub mod registry;
pub mod report;

pub use ast::{build_ast, AstBuildError, Program};
pub use detectors::Finding;
pub use metrics::{project_metrics, wmc, ProjectMetrics};
pub use model::{parse_project, validate, LoadError, RawProject, Warning};
pub use registry::{list_detectors, Category, DetectorDescriptor, Registry, RegistryError, Selection};
pub use report::{analyze_json, analyze_project, AnalysisReport, CorpusStats, DetectorStats, Status};
