//! Evaluation pipeline: datasets, experiments, metrics, significance and reports.

mod config;
mod dataset;
mod experiment;
mod metrics;
mod predictions;
mod report;

pub use config::{EvalConfig, DEFAULT_CACHE_DIR, DEFAULT_K};
pub use dataset::{load_listwise_dataset, load_pair_dataset};
pub use experiment::{run_direct_pairwise, run_listwise, run_pairwise, ExperimentOptions};
pub use metrics::{
    format_p_value, format_percent, macro_by_source, micro_accuracy, paired_comparison,
    round_half_up, weighted_average, Credit, PairedCounts, SourceRow,
};
pub use predictions::{read_predictions, write_predictions, PredictionRecord, PredictionTrace};
pub use report::{build_report, emit_report, read_metrics, render_report, ItemDelta, MetricsReport, ReportFormat};
pub use sign_test::exact_sign_test;

use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Dataset { path: PathBuf, line: usize, reason: String },
    #[error("invalid item {id}: {reason}")]
    InvalidItem { id: String, reason: String },
    #[error("item {0} has no gold label")]
    MissingGold(String),
    #[error("item {0} has no source bucket")]
    MissingSource(String),
    #[error("no predictions")]
    NoPredictions,
    #[error("paired runs disagree on item ids: {0}")]
    IdMismatch(String),
    #[error("no discordant pairs")]
    NoDiscordantPairs,
    #[error("weighted average needs at least one row")]
    EmptyRows,
    #[error("row {index} has non-positive weight")]
    NonPositiveWeight { index: usize },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{0}")]
    Serialization(String),
}

impl EvalError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| EvalError::Io { path, source }
    }
}

/// One listwise evaluation item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalItem {
    pub id: String,
    pub prompt: String,
    pub candidates: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl EvalItem {
    pub fn validate(&self) -> Result<(), EvalError> {
        let invalid = |reason: String| EvalError::InvalidItem {
            id: self.id.clone(),
            reason,
        };
        if self.id.is_empty() {
            return Err(invalid("empty id".into()));
        }
        let n = self.candidates.len();
        if n < 2 {
            return Err(invalid(format!("listwise requires ≥2 candidates, got {n}")));
        }
        if let Some(g) = self.gold_index {
            if g >= n {
                return Err(invalid(format!("gold_index {g} out of range for {n} candidates")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.candidates.len()
    }
}
