use crate::consensus::{ConsensusError, ConsensusSummary, RunVerdict};
use crate::eval::EvalItem;
use crate::judge::{JudgeError, ListwiseJudge};
use crate::permutation::{Permutation, PermutationSchedule};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PcfError {
    #[error("invalid item {id}: {reason}")]
    InvalidItem { id: String, reason: String },
    #[error("schedule is for n={schedule} but item {id} has {item} candidates")]
    ScheduleMismatch { id: String, schedule: usize, item: usize },
    #[error("insufficient runs for item {id}: {succeeded} succeeded, {required} required")]
    InsufficientRuns {
        id: String,
        succeeded: usize,
        required: usize,
        failures: Vec<RunFailure>,
    },
    #[error(transparent)]
    Consensus(#[from] ConsensusError),
}

/// A run whose judge call failed after the gateway's retries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub run_index: usize,
    pub permutation: Permutation,
    pub error: String,
}

/// Consensus summary plus the full per-run trace it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcfOutcome {
    pub summary: ConsensusSummary,
    pub runs: Vec<RunVerdict>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<RunFailure>,
}

impl PcfOutcome {
    /// Recomputes the summary from the stored runs.
    pub fn recompute(&self) -> Result<ConsensusSummary, ConsensusError> {
        ConsensusSummary::from_runs(&self.runs, self.summary.tolerance)
    }
}

/// Smallest number of surviving runs an item may be aggregated over: a
/// strict majority plus one, never more than the schedule holds.
pub fn min_successful_runs(k: usize) -> usize {
    (k.div_ceil(2) + 1).min(k)
}

/// Judges `item` under every permutation of `schedule`, remaps each run to
/// original candidate ids and aggregates the survivors.
pub fn run_pcfjudge<J>(
    item: &EvalItem,
    schedule: &PermutationSchedule,
    judge: &J,
    tolerance: f64,
) -> Result<PcfOutcome, PcfError>
where
    J: ListwiseJudge + ?Sized,
{
    item.validate().map_err(|e| PcfError::InvalidItem {
        id: item.id.clone(),
        reason: e.to_string(),
    })?;
    if schedule.n() != item.candidates.len() {
        return Err(PcfError::ScheduleMismatch {
            id: item.id.clone(),
            schedule: schedule.n(),
            item: item.candidates.len(),
        });
    }

    let results: Vec<Result<RunVerdict, (usize, JudgeError)>> = schedule
        .permutations()
        .par_iter()
        .enumerate()
        .map(|(i, perm)| {
            let run_index = i + 1;
            judge
                .judge(item, perm)
                .and_then(|resp| resp.into_run_verdict(run_index, perm))
                .map_err(|e| (i, e))
        })
        .collect();

    let mut runs = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for result in results {
        match result {
            Ok(run) => runs.push(run),
            Err((i, e)) => {
                log::warn!("item {}: run {} failed: {e}", item.id, i + 1);
                failures.push(RunFailure {
                    run_index: i + 1,
                    permutation: schedule.permutations()[i].clone(),
                    error: e.to_string(),
                });
            }
        }
    }

    let required = min_successful_runs(schedule.k());
    if runs.len() < required {
        return Err(PcfError::InsufficientRuns {
            id: item.id.clone(),
            succeeded: runs.len(),
            required,
            failures,
        });
    }

    let summary = ConsensusSummary::from_runs(&runs, tolerance)?;
    Ok(PcfOutcome {
        summary,
        runs,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consensus::CandidateId;
    use crate::judge::{LatentQuality, ListwiseJudgeResponse, MockJudge, MockProfile};
    use std::collections::BTreeSet;

    fn item() -> EvalItem {
        EvalItem {
            id: "x".into(),
            prompt: "p".into(),
            candidates: vec!["a".into(), "b".into(), "c".into(), "d".into()],
            gold_index: Some(0),
            source: None,
        }
    }

    fn explicit(scores: [f64; 4], bias: f64) -> MockJudge {
        MockJudge::new(MockProfile {
            bias,
            noise: 0.0,
            seed: 0,
            latent: LatentQuality::Explicit {
                scores: scores.to_vec(),
            },
        })
    }

    #[test]
    fn k_min_values() {
        assert_eq!(min_successful_runs(1), 1);
        assert_eq!(min_successful_runs(2), 2);
        assert_eq!(min_successful_runs(3), 3);
        assert_eq!(min_successful_runs(7), 5);
        assert_eq!(min_successful_runs(8), 5);
    }

    #[test]
    fn content_preferring_judge_gives_unanimous_winner() {
        let schedule = PermutationSchedule::build(4, 7, 1).unwrap();
        let out = run_pcfjudge(&item(), &schedule, &explicit([90.0, 60.0, 50.0, 40.0], 0.0), 0.5).unwrap();
        assert_eq!(out.summary.winners, BTreeSet::from([CandidateId(0)]));
        assert_eq!(out.summary.k_used, 7);
        assert_eq!(out.runs.len(), 7);
        assert_eq!(out.recompute().unwrap(), out.summary);
    }

    #[test]
    fn first_position_bias_splits_votes_by_schedule_frequency() {
        let judge = explicit([50.0; 4], 1.0);
        let k1 = PermutationSchedule::build(4, 1, 5).unwrap();
        let out = run_pcfjudge(&item(), &k1, &judge, 0.5).unwrap();
        assert_eq!(out.summary.winners, BTreeSet::from([CandidateId(0)]));

        let k7 = PermutationSchedule::build(4, 7, 5).unwrap();
        let out = run_pcfjudge(&item(), &k7, &judge, 0.5).unwrap();
        for c in 0..4 {
            let expected = k7.position_frequency(c, 0) as f64 / 7.0;
            assert!((out.summary.top_vote[c] - expected).abs() < 1e-12);
        }
    }

    /// Fails on every permutation listed in `bad`.
    struct Flaky {
        bad: Vec<Vec<usize>>,
        inner: MockJudge,
    }

    impl ListwiseJudge for Flaky {
        fn judge(&self, item: &EvalItem, p: &Permutation) -> Result<ListwiseJudgeResponse, JudgeError> {
            if self.bad.contains(&p.mapping().to_vec()) {
                return Err(JudgeError::Backend("boom".into()));
            }
            self.inner.judge(item, p)
        }
    }

    #[test]
    fn failed_runs_are_dropped_until_below_k_min() {
        let schedule = PermutationSchedule::build(4, 7, 2).unwrap();
        let perms: Vec<Vec<usize>> = schedule.permutations().iter().map(|p| p.mapping().to_vec()).collect();
        let inner = explicit([90.0, 60.0, 50.0, 40.0], 0.0);

        let two_bad = Flaky {
            bad: perms[1..3].to_vec(),
            inner: inner.clone(),
        };
        let out = run_pcfjudge(&item(), &schedule, &two_bad, 0.5).unwrap();
        assert_eq!(out.summary.k_used, 5);
        assert_eq!(out.failures.iter().map(|f| f.run_index).collect::<Vec<_>>(), vec![2, 3]);

        let three_bad = Flaky {
            bad: perms[..3].to_vec(),
            inner,
        };
        match run_pcfjudge(&item(), &schedule, &three_bad, 0.5) {
            Err(PcfError::InsufficientRuns { succeeded, required, failures, .. }) => {
                assert_eq!((succeeded, required, failures.len()), (4, 5, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_mismatched_schedule_and_bad_items() {
        let schedule = PermutationSchedule::build(3, 2, 2).unwrap();
        let judge = explicit([1.0; 4], 0.0);
        assert!(matches!(
            run_pcfjudge(&item(), &schedule, &judge, 0.5),
            Err(PcfError::ScheduleMismatch { .. })
        ));
        let mut one = item();
        one.candidates.truncate(1);
        one.gold_index = None;
        assert!(matches!(
            run_pcfjudge(&one, &schedule, &judge, 0.5),
            Err(PcfError::InvalidItem { .. })
        ));
    }
}
