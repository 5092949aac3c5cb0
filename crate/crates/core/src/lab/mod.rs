//! Config-driven experiments: each run writes CSV outputs and a `summary.txt`
//! of pass/fail lines into its output directory.

mod config;
mod experiments;

use std::fmt;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::bounds::BoundsError;
use crate::dimension::DimensionError;
use crate::field::FieldError;
use crate::solver::SolverError;

pub use config::{
    BoundsSection, ChecksSection, DimensionSection, ExperimentConfig, ExperimentKind, ExperimentSection,
    GridSection, InitialSection, InitialShape, ScanSection, SolverSection,
};
pub use experiments::{
    backward_blowup_scan, certification_report, dimension_report, initial_field, rough_oracle_checks, rough_report,
    run_experiment, RoughRow, ScanRow, ROUGH_CSV_HEADER, SCAN_CSV_HEADER,
};

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error at {path}: {msg}")]
    Config { path: String, msg: String },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Dimension(#[from] DimensionError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl LabError {
    pub fn is_config(&self) -> bool {
        matches!(self, LabError::Config { .. })
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pub kind: Option<ExperimentKind>,
    pub checks: Vec<Check>,
}

impl Summary {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind: Some(kind),
            checks: Vec::new(),
        }
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        if let Some(kind) = self.kind {
            writeln!(out, "experiment {}", kind.name())?;
        }
        for c in &self.checks {
            writeln!(out, "{c}")?;
        }
        let tag = if self.all_passed() { "PASS" } else { "FAIL" };
        writeln!(out, "{tag} overall")
    }
}
