//! Permutation-consensus estimator.
//!
//! Each permutation run yields, per original candidate, a score in `[0, 100]`,
//! a strict rank and three binary flags. The runs are folded into four
//! per-candidate aggregates:
//!
//! * mean score `s̄_i = (1/K) Σ_r s_i^(r)`
//! * Borda share `B_i = 100 / (K (n - 1)) · Σ_r (n - rank_i^(r))`
//! * top vote `v_i = (1/K) Σ_r 1[i ∈ T^(r)] / |T^(r)|`, where `T^(r)` is the
//!   set of candidates achieving the maximum score in run `r`
//! * uncertainty share `u_i`, the fraction of runs flagging calibrated uncertainty
//!
//! and combined as `C_i = 0.50 s̄_i + 0.25 B_i + 0.20 (100 v_i) + 0.05 (100 u_i)`.
//! Candidates whose `C_i` lies within the tie tolerance of the maximum are
//! all retained as winners.
//!
//! The major-error and hallucinated-specificity flags are carried for
//! diagnostics and do not enter the consensus score.
//!
//! Every aggregate is a symmetric sum whose terms are sorted before
//! accumulation, so any reordering of the same runs produces bitwise
//! identical output.

use crate::permutation::Permutation;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

pub const MEAN_SCORE_WEIGHT: f64 = 0.50;
pub const BORDA_WEIGHT: f64 = 0.25;
pub const TOP_VOTE_WEIGHT: f64 = 0.20;
pub const UNCERTAINTY_WEIGHT: f64 = 0.05;

/// Default tie tolerance on the 0–100 consensus scale.
pub const DEFAULT_TIE_TOLERANCE: f64 = 0.5;

pub const SCORE_MIN: f64 = 0.0;
pub const SCORE_MAX: f64 = 100.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConsensusError {
    #[error("no runs")]
    NoRuns,
    #[error("inconsistent candidate count: expected {expected}, got {actual}")]
    InconsistentCandidateCount { expected: usize, actual: usize },
    #[error("listwise requires ≥2 candidates")]
    TooFewCandidates,
    #[error("invalid ranking")]
    InvalidRanking,
    #[error("run missing top set")]
    MissingTopSet,
    #[error("score out of range: {0}")]
    ScoreOutOfRange(f64),
    #[error("component out of range: {name}[{index}] = {value}")]
    ComponentOutOfRange {
        name: &'static str,
        index: usize,
        value: f64,
    },
    #[error("negative tolerance: {0}")]
    NegativeTolerance(f64),
    #[error("run index must be ≥1")]
    InvalidRunIndex,
    #[error("permutation covers {permutation} positions but run has {candidates} candidates")]
    PermutationMismatch { permutation: usize, candidates: usize },
    #[error("recorded top set does not match the run's maximum scores")]
    TopSetMismatch,
}

/// Index into the original (unpermuted) candidate order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CandidateId(pub usize);

impl CandidateId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One candidate's judged outputs within a single run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateVerdict {
    pub score: f64,
    pub rank: usize,
    pub major_error: bool,
    pub halluc_specificity: bool,
    pub calibrated_uncertainty: bool,
    #[serde(default)]
    pub rationale: String,
}

/// One permutation run, already remapped to original candidate order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RunVerdictRepr")]
pub struct RunVerdict {
    run_index: usize,
    permutation: Permutation,
    candidates: Vec<CandidateVerdict>,
    top_set: BTreeSet<CandidateId>,
}

#[derive(Deserialize)]
struct RunVerdictRepr {
    run_index: usize,
    permutation: Permutation,
    candidates: Vec<CandidateVerdict>,
    #[serde(default)]
    top_set: Option<BTreeSet<CandidateId>>,
}

impl TryFrom<RunVerdictRepr> for RunVerdict {
    type Error = ConsensusError;

    fn try_from(repr: RunVerdictRepr) -> Result<Self, Self::Error> {
        let run = RunVerdict::new(repr.run_index, repr.permutation, repr.candidates)?;
        match repr.top_set {
            Some(recorded) if recorded != run.top_set => Err(ConsensusError::TopSetMismatch),
            _ => Ok(run),
        }
    }
}

impl RunVerdict {
    /// Validates a remapped run and derives its top set from within-run score ties.
    ///
    /// `candidates` must be indexed by original candidate id.
    pub fn new(
        run_index: usize,
        permutation: Permutation,
        candidates: Vec<CandidateVerdict>,
    ) -> Result<Self, ConsensusError> {
        if run_index == 0 {
            return Err(ConsensusError::InvalidRunIndex);
        }
        let n = candidates.len();
        if n == 0 {
            return Err(ConsensusError::TooFewCandidates);
        }
        if permutation.len() != n {
            return Err(ConsensusError::PermutationMismatch {
                permutation: permutation.len(),
                candidates: n,
            });
        }
        for c in &candidates {
            if !(SCORE_MIN..=SCORE_MAX).contains(&c.score) {
                return Err(ConsensusError::ScoreOutOfRange(c.score));
            }
        }
        let mut seen = vec![false; n];
        for c in &candidates {
            if c.rank == 0 || c.rank > n || seen[c.rank - 1] {
                return Err(ConsensusError::InvalidRanking);
            }
            seen[c.rank - 1] = true;
        }

        let max = candidates
            .iter()
            .map(|c| c.score)
            .fold(f64::NEG_INFINITY, f64::max);
        let top_set = candidates
            .iter()
            .enumerate()
            .filter(|(_, c)| c.score == max)
            .map(|(i, _)| CandidateId(i))
            .collect();

        Ok(Self {
            run_index,
            permutation,
            candidates,
            top_set,
        })
    }

    pub fn run_index(&self) -> usize {
        self.run_index
    }

    pub fn permutation(&self) -> &Permutation {
        &self.permutation
    }

    pub fn candidates(&self) -> &[CandidateVerdict] {
        &self.candidates
    }

    pub fn n(&self) -> usize {
        self.candidates.len()
    }

    pub fn top_set(&self) -> &BTreeSet<CandidateId> {
        &self.top_set
    }

    pub fn scores(&self) -> Vec<f64> {
        self.candidates.iter().map(|c| c.score).collect()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.candidates.iter().map(|c| c.rank).collect()
    }
}

/// Per-candidate aggregates and the tie-tolerant winner set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusSummary {
    pub mean_score: Vec<f64>,
    pub borda: Vec<f64>,
    pub top_vote: Vec<f64>,
    pub uncertainty_share: Vec<f64>,
    pub consensus: Vec<f64>,
    pub winners: BTreeSet<CandidateId>,
    pub k_used: usize,
    pub tolerance: f64,
}

impl ConsensusSummary {
    /// Aggregates `runs` and selects winners within `tolerance` of the best consensus score.
    pub fn from_runs(runs: &[RunVerdict], tolerance: f64) -> Result<Self, ConsensusError> {
        let n = check_runs(runs)?;
        if n < 2 {
            return Err(ConsensusError::TooFewCandidates);
        }
        let mean_score = aggregate_mean_scores(runs)?;
        let borda = aggregate_borda(runs)?;
        let top_vote = aggregate_top_vote(runs)?;
        let uncertainty_share = aggregate_uncertainty(runs)?;
        let consensus = consensus_score(&mean_score, &borda, &top_vote, &uncertainty_share)?;
        let winners = select_winners(&consensus, tolerance)?;
        Ok(Self {
            mean_score,
            borda,
            top_vote,
            uncertainty_share,
            consensus,
            winners,
            k_used: runs.len(),
            tolerance,
        })
    }

    pub fn n(&self) -> usize {
        self.consensus.len()
    }

    /// Candidate with the highest consensus score, lowest id on exact ties.
    pub fn argmax(&self) -> CandidateId {
        argmax(&self.consensus)
    }
}

fn check_runs(runs: &[RunVerdict]) -> Result<usize, ConsensusError> {
    let first = runs.first().ok_or(ConsensusError::NoRuns)?;
    let n = first.n();
    for run in runs {
        if run.n() != n {
            return Err(ConsensusError::InconsistentCandidateCount {
                expected: n,
                actual: run.n(),
            });
        }
    }
    Ok(n)
}

/// Sum that does not depend on the order of `terms`.
fn symmetric_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.into_iter().sum()
}

/// Per-candidate collect → sort → sum → scale.
fn per_candidate<F>(runs: &[RunVerdict], n: usize, scale: f64, term: F) -> Vec<f64>
where
    F: Fn(&RunVerdict, usize) -> f64,
{
    (0..n)
        .map(|i| symmetric_sum(runs.iter().map(|r| term(r, i)).collect()) * scale)
        .collect()
}

pub fn aggregate_mean_scores(runs: &[RunVerdict]) -> Result<Vec<f64>, ConsensusError> {
    let n = check_runs(runs)?;
    let k = runs.len() as f64;
    Ok((0..n)
        .map(|i| symmetric_sum(runs.iter().map(|r| r.candidates[i].score).collect()) / k)
        .collect())
}

pub fn aggregate_borda(runs: &[RunVerdict]) -> Result<Vec<f64>, ConsensusError> {
    let n = check_runs(runs)?;
    if n < 2 {
        return Err(ConsensusError::TooFewCandidates);
    }
    let denom = (runs.len() * (n - 1)) as f64;
    Ok((0..n)
        .map(|i| {
            // Integer accumulation is exact and order-free.
            let points: usize = runs.iter().map(|r| n - r.candidates[i].rank).sum();
            100.0 * points as f64 / denom
        })
        .collect())
}

pub fn aggregate_top_vote(runs: &[RunVerdict]) -> Result<Vec<f64>, ConsensusError> {
    let n = check_runs(runs)?;
    if runs.iter().any(|r| r.top_set.is_empty()) {
        return Err(ConsensusError::MissingTopSet);
    }
    let k = runs.len() as f64;
    Ok(per_candidate(runs, n, 1.0 / k, |r, i| {
        if r.top_set.contains(&CandidateId(i)) {
            1.0 / r.top_set.len() as f64
        } else {
            0.0
        }
    }))
}

pub fn aggregate_uncertainty(runs: &[RunVerdict]) -> Result<Vec<f64>, ConsensusError> {
    let n = check_runs(runs)?;
    let k = runs.len() as f64;
    Ok((0..n)
        .map(|i| {
            let flagged = runs
                .iter()
                .filter(|r| r.candidates[i].calibrated_uncertainty)
                .count();
            flagged as f64 / k
        })
        .collect())
}

fn check_component(
    name: &'static str,
    values: &[f64],
    max: f64,
) -> Result<(), ConsensusError> {
    for (index, &value) in values.iter().enumerate() {
        if !(0.0..=max).contains(&value) {
            return Err(ConsensusError::ComponentOutOfRange { name, index, value });
        }
    }
    Ok(())
}

/// Weighted combination of the four aggregates on the 0–100 scale.
pub fn consensus_score(
    mean_score: &[f64],
    borda: &[f64],
    top_vote: &[f64],
    uncertainty_share: &[f64],
) -> Result<Vec<f64>, ConsensusError> {
    let n = mean_score.len();
    for len in [borda.len(), top_vote.len(), uncertainty_share.len()] {
        if len != n {
            return Err(ConsensusError::InconsistentCandidateCount {
                expected: n,
                actual: len,
            });
        }
    }
    check_component("mean_score", mean_score, SCORE_MAX)?;
    check_component("borda", borda, SCORE_MAX)?;
    check_component("top_vote", top_vote, 1.0)?;
    check_component("uncertainty_share", uncertainty_share, 1.0)?;

    Ok((0..n)
        .map(|i| {
            let c = MEAN_SCORE_WEIGHT * mean_score[i]
                + BORDA_WEIGHT * borda[i]
                + TOP_VOTE_WEIGHT * (100.0 * top_vote[i])
                + UNCERTAINTY_WEIGHT * (100.0 * uncertainty_share[i]);
            // Only trims last-ulp excursions; the exact combination is already in range.
            c.clamp(SCORE_MIN, SCORE_MAX)
        })
        .collect())
}

/// Every candidate whose consensus score is within `tolerance` of the maximum.
pub fn select_winners(
    consensus: &[f64],
    tolerance: f64,
) -> Result<BTreeSet<CandidateId>, ConsensusError> {
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(ConsensusError::NegativeTolerance(tolerance));
    }
    if consensus.is_empty() {
        return Err(ConsensusError::TooFewCandidates);
    }
    if let Some((index, &value)) = consensus.iter().enumerate().find(|(_, c)| !c.is_finite()) {
        return Err(ConsensusError::ComponentOutOfRange {
            name: "consensus",
            index,
            value,
        });
    }
    let best = consensus.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(consensus
        .iter()
        .enumerate()
        .filter(|(_, &c)| best - c <= tolerance)
        .map(|(i, _)| CandidateId(i))
        .collect())
}

fn argmax(values: &[f64]) -> CandidateId {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    CandidateId(best)
}
