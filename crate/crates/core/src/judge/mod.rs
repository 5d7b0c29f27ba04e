//! Listwise judge gateway: prompt construction, backend calls with a
//! content-addressed cache, strict response parsing, and a configurable
//! mock judge.

mod backend;
mod cache;
mod gateway;
mod mock;
mod prompt;
mod response;

use crate::consensus::{CandidateVerdict, ConsensusError, RunVerdict};
use crate::eval::EvalItem;
use crate::permutation::{Permutation, PermutationError};
use thiserror::Error;

pub use backend::{
    Backend, BackendKind, CannedBackend, HttpBackend, JudgeBackendConfig, JudgeRequest,
    MockBackend, RequestContext, RetryPolicy,
};
pub use cache::{cache_key, CacheMetadata, CachedResponse, ResponseCache};
pub use gateway::{JudgeClient, ListwiseGateway, DEFAULT_RATIONALE_LIMIT};
pub use mock::{mock_judge, render_listwise_response, LatentQuality, MockJudge, MockProfile};
pub use prompt::{build_listwise_prompt, corrective_prompt, LISTWISE_TEMPLATE_VERSION};
pub use response::{parse_listwise_response, PresentedRecord};

pub(crate) use response::extract_structured_block;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JudgeError {
    /// The response has no usable structured block or the block is not the expected shape.
    #[error("parse error: {0}")]
    Parse(String),
    /// The block parsed but violates the response contract.
    #[error("validation error: {0}")]
    Validation(String),
    #[error("backend error: {0}")]
    Backend(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("cache error: {0}")]
    Cache(String),
    #[error("invalid input: {0}")]
    Input(String),
}

impl JudgeError {
    /// Parse and validation failures may be fixed by a corrective re-prompt.
    pub fn is_correctable(&self) -> bool {
        matches!(self, JudgeError::Parse(_) | JudgeError::Validation(_))
    }
}

impl From<PermutationError> for JudgeError {
    fn from(e: PermutationError) -> Self {
        JudgeError::Input(e.to_string())
    }
}

impl From<ConsensusError> for JudgeError {
    fn from(e: ConsensusError) -> Self {
        JudgeError::Validation(e.to_string())
    }
}

/// Parsed listwise output, indexed by presented position.
#[derive(Debug, Clone, PartialEq)]
pub struct ListwiseJudgeResponse {
    pub records: Vec<PresentedRecord>,
    /// Presented positions (0-based), best first.
    pub ranking: Vec<usize>,
    /// Set when at least one rationale was cut at the configured length.
    pub rationale_truncated: bool,
}

impl ListwiseJudgeResponse {
    pub fn n(&self) -> usize {
        self.records.len()
    }

    /// 1-based rank of each presented position.
    pub fn ranks_by_position(&self) -> Vec<usize> {
        let mut ranks = vec![0; self.ranking.len()];
        for (slot, &pos) in self.ranking.iter().enumerate() {
            ranks[pos] = slot + 1;
        }
        ranks
    }

    /// Maps the presented-order response back to original candidate ids.
    pub fn into_run_verdict(
        self,
        run_index: usize,
        permutation: &Permutation,
    ) -> Result<RunVerdict, JudgeError> {
        let ranks = self.ranks_by_position();
        let presented: Vec<CandidateVerdict> = self
            .records
            .into_iter()
            .zip(ranks)
            .map(|(r, rank)| CandidateVerdict {
                score: r.score,
                rank,
                major_error: r.major_error,
                halluc_specificity: r.halluc_specificity,
                calibrated_uncertainty: r.calibrated_uncertainty,
                rationale: r.rationale,
            })
            .collect();
        let original = permutation.remap(&presented)?;
        Ok(RunVerdict::new(run_index, permutation.clone(), original)?)
    }
}

/// Anything that can judge one presented ordering of an item.
pub trait ListwiseJudge: Send + Sync {
    fn judge(
        &self,
        item: &EvalItem,
        permutation: &Permutation,
    ) -> Result<ListwiseJudgeResponse, JudgeError>;
}

impl<J: ListwiseJudge + ?Sized> ListwiseJudge for &J {
    fn judge(
        &self,
        item: &EvalItem,
        permutation: &Permutation,
    ) -> Result<ListwiseJudgeResponse, JudgeError> {
        (**self).judge(item, permutation)
    }
}

impl<J: ListwiseJudge + ?Sized> ListwiseJudge for std::sync::Arc<J> {
    fn judge(
        &self,
        item: &EvalItem,
        permutation: &Permutation,
    ) -> Result<ListwiseJudgeResponse, JudgeError> {
        (**self).judge(item, permutation)
    }
}
