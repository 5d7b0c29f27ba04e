use crate::eval::{EvalError, EvalItem};
use crate::pairwise::{PairDecision, PairItem, PairWinner};
use crate::permutation::PcfOutcome;
use serde::{Deserialize, Serialize};
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Decision trace behind a prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PredictionTrace {
    Listwise(PcfOutcome),
    Pair(PairDecision),
    Direct { winner: PairWinner },
}

/// One line of a prediction file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub item_id: String,
    pub method: String,
    /// Winning candidate indices; empty for a failed item or a pairwise tie.
    pub winners: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<usize>,
    /// Top-hit correctness; present iff `gold` is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct: Option<bool>,
    /// Exact-top-1 correctness; present iff `gold` is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_correct: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<PredictionTrace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Wall-clock stamp; the only field allowed to differ between replays.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recorded_at: Option<String>,
}

impl PredictionRecord {
    fn new(item_id: &str, method: &str, winners: Vec<usize>, gold: Option<usize>, source: Option<String>) -> Self {
        let mut record = Self {
            item_id: item_id.to_string(),
            method: method.to_string(),
            winners,
            gold,
            correct: None,
            exact_correct: None,
            source,
            trace: None,
            error: None,
            recorded_at: None,
        };
        record.set_gold(gold);
        record
    }

    pub fn listwise(item: &EvalItem, method: &str, outcome: PcfOutcome) -> Self {
        let winners = outcome.summary.winners.iter().map(|c| c.index()).collect();
        let mut r = Self::new(&item.id, method, winners, item.gold_index, item.source.clone());
        r.trace = Some(PredictionTrace::Listwise(outcome));
        r
    }

    pub fn pair(item: &PairItem, method: &str, decision: PairDecision) -> Self {
        let mut r = Self::new(&item.id, method, decision.winners(), item.gold(), item.source.clone());
        r.trace = Some(PredictionTrace::Pair(decision));
        r
    }

    pub fn direct_pair(item: &PairItem, method: &str, winner: PairWinner) -> Self {
        let mut r = Self::new(&item.id, method, winner.as_indices(), item.gold(), item.source.clone());
        r.trace = Some(PredictionTrace::Direct { winner });
        r
    }

    /// A prediction for an item the method could not decide; counts as wrong.
    pub fn failed(item_id: &str, method: &str, gold: Option<usize>, source: Option<String>, error: String) -> Self {
        let mut r = Self::new(item_id, method, Vec::new(), gold, source);
        r.error = Some(error);
        r
    }

    /// Sets the gold index and recomputes both correctness flags.
    pub fn set_gold(&mut self, gold: Option<usize>) {
        self.gold = gold;
        self.correct = gold.map(|g| self.winners.contains(&g));
        self.exact_correct = gold.map(|g| self.winners == [g]);
    }

    pub fn with_timestamp(mut self, stamp: impl Into<String>) -> Self {
        self.recorded_at = Some(stamp.into());
        self
    }
}

/// Appends records as JSONL through a single buffered writer.
pub fn write_predictions(path: &Path, records: &[PredictionRecord], append: bool) -> Result<(), EvalError> {
    let file = OpenOptions::new()
        .create(true)
        .write(true)
        .append(append)
        .truncate(!append)
        .open(path)
        .map_err(EvalError::io(path))?;
    let mut out = BufWriter::new(file);
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| EvalError::Serialization(e.to_string()))?;
        writeln!(out, "{line}").map_err(EvalError::io(path))?;
    }
    out.flush().map_err(EvalError::io(path))
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>, EvalError> {
    let file = std::fs::File::open(path).map_err(EvalError::io(path))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(EvalError::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| EvalError::Dataset {
            path: path.to_path_buf(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}
