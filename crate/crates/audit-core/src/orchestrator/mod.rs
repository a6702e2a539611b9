//! End-to-end drive: plan, query, label, aggregate, report.

mod analyze;
mod plan;
mod rank;
mod report;
mod run;
mod selftest;

pub use analyze::{analyze, AmbiguousRecord, BiasReport, DebiasRow, GiRow, MrRow, SpearmanRow};
pub use plan::{plan, slug, Plan};
pub use rank::{rank, RANK_TASK_SLUG};
pub use report::{report_csv, report_json, report_markdown, write_reports};
pub use run::{run, promote_fingerprints, RunManifest, RunOutcome};
pub use selftest::{selftest, SelftestOutcome};

use std::path::PathBuf;

use thiserror::Error;

use crate::analyzer::AnalyzerError;
use crate::config::ConfigError;
use crate::gateway::GatewayError;
use crate::metrics::MetricsError;
use crate::prompt::PromptError;
use crate::registry::RegistryError;

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("plan expands to zero cases")]
    EmptyPlan,
    #[error("run directory is locked by another process ({0})")]
    LockHeld(PathBuf),
    #[error("run directory is missing required data: {0}")]
    MissingRunData(String),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Analyzer(#[from] AnalyzerError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed run artifact: {0}")]
    Json(#[from] serde_json::Error),
}
