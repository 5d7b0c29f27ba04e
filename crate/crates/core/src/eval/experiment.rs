use crate::eval::{EvalError, EvalItem, PredictionRecord};
use crate::judge::ListwiseJudge;
use crate::pairwise::{judge_pair_once, run_apocjudge, EstimationDetector, PairItem, PairJudge, PairOrder};
use crate::permutation::{run_pcfjudge, PermutationSchedule};
use chrono::{SecondsFormat, Utc};
use rayon::prelude::*;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExperimentOptions {
    /// Worker threads for item-level fan-out.
    pub parallelism: usize,
    /// Stamp each record with the wall-clock time.
    pub timestamps: bool,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            parallelism: std::thread::available_parallelism().map_or(4, |n| n.get()),
            timestamps: true,
        }
    }
}

impl ExperimentOptions {
    /// Maps `f` over `items` on a bounded pool, keeping input order.
    fn fan_out<T, F>(&self, items: &[T], f: F) -> Result<Vec<PredictionRecord>, EvalError>
    where
        T: Sync,
        F: Fn(&T) -> PredictionRecord + Sync + Send,
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.parallelism.max(1))
            .build()
            .map_err(|e| EvalError::Config(format!("worker pool: {e}")))?;
        let records: Vec<PredictionRecord> = pool.install(|| items.par_iter().map(&f).collect());
        if !self.timestamps {
            return Ok(records);
        }
        let now = Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true);
        Ok(records.into_iter().map(|r| r.with_timestamp(now.clone())).collect())
    }
}

/// Runs permutation consensus over every item. `k = 1` is the direct
/// single-order baseline. Items that cannot be decided are recorded as
/// failed predictions rather than aborting the run.
pub fn run_listwise<J: ListwiseJudge + ?Sized>(
    items: &[EvalItem],
    judge: &J,
    k: usize,
    seed: u64,
    tolerance: f64,
    method: &str,
    options: ExperimentOptions,
) -> Result<Vec<PredictionRecord>, EvalError> {
    let mut schedules = BTreeMap::new();
    for item in items {
        item.validate()?;
        let n = item.n();
        if let std::collections::btree_map::Entry::Vacant(slot) = schedules.entry(n) {
            let schedule = PermutationSchedule::build(n, k, seed)
                .map_err(|e| EvalError::Config(format!("schedule for n={n}: {e}")))?;
            slot.insert(schedule);
        }
    }
    options.fan_out(items, |item| {
        match run_pcfjudge(item, &schedules[&item.n()], judge, tolerance) {
            Ok(outcome) => PredictionRecord::listwise(item, method, outcome),
            Err(e) => {
                log::warn!("item {}: {e}", item.id);
                PredictionRecord::failed(&item.id, method, item.gold_index, item.source.clone(), e.to_string())
            }
        }
    })
}

/// Runs the order-swapped pairwise protocol with keyed confirmation.
pub fn run_pairwise<J: PairJudge + ?Sized>(
    items: &[PairItem],
    judge: &J,
    detector: &EstimationDetector,
    method: &str,
    options: ExperimentOptions,
) -> Result<Vec<PredictionRecord>, EvalError> {
    options.fan_out(items, |item| match run_apocjudge(item, judge, detector) {
        Ok(decision) => PredictionRecord::pair(item, method, decision),
        Err(e) => pair_failure(item, method, e.to_string()),
    })
}

/// Single A-then-B judgement per pair.
pub fn run_direct_pairwise<J: PairJudge + ?Sized>(
    items: &[PairItem],
    judge: &J,
    method: &str,
    options: ExperimentOptions,
) -> Result<Vec<PredictionRecord>, EvalError> {
    options.fan_out(items, |item| match judge_pair_once(item, PairOrder::AB, judge) {
        Ok(winner) => PredictionRecord::direct_pair(item, method, winner),
        Err(e) => pair_failure(item, method, e.to_string()),
    })
}

fn pair_failure(item: &PairItem, method: &str, error: String) -> PredictionRecord {
    log::warn!("item {}: {error}", item.id);
    PredictionRecord::failed(&item.id, method, item.gold(), item.source.clone(), error)
}
