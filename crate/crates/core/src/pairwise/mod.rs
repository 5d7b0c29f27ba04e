//! Order-swapped pairwise judging with keyed confirmation (APOC).
//!
//! Each pair is judged in both presentation orders. When the two orders
//! agree the baseline stands. When they disagree, an override to the
//! swapped-order winner is accepted only if an independent keyed judge,
//! which first resolves the question itself, picks the same winner.
//! Overrides are never attempted on estimation-style questions.

mod estimation;
mod gateway;
mod mock;
mod prompt;

use crate::judge::JudgeError;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub use estimation::{EstimationDetector, DEFAULT_ESTIMATION_PATTERNS};
pub use gateway::PairGateway;
pub use mock::{mock_keyed_answer, mock_keyed_compare, mock_pair_compare, MockPairProfile};
pub use prompt::{
    build_keyed_compare_prompt, build_keyed_resolve_prompt, build_pair_prompt, parse_keyed_answer,
    parse_keyed_verdict, parse_pair_response, render_keyed_answer, render_keyed_verdict,
    render_pair_response, KEYED_TEMPLATE_VERSION, PAIR_TEMPLATE_VERSION,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PairError {
    #[error("invalid pair item {id}: {reason}")]
    InvalidItem { id: String, reason: String },
    #[error("{stage} call failed for item {id}: {source}")]
    Judge {
        id: String,
        stage: &'static str,
        source: JudgeError,
    },
}

/// Gold preference between the two responses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairLabel {
    #[serde(rename = "A>B")]
    AOverB,
    #[serde(rename = "B>A")]
    BOverA,
}

impl PairLabel {
    pub fn winner(self) -> PairWinner {
        match self {
            PairLabel::AOverB => PairWinner::A,
            PairLabel::BOverA => PairWinner::B,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            PairLabel::AOverB => PairLabel::BOverA,
            PairLabel::BOverA => PairLabel::AOverB,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairWinner {
    A,
    B,
    #[serde(rename = "tie")]
    Tie,
}

impl PairWinner {
    pub fn flipped(self) -> Self {
        match self {
            PairWinner::A => PairWinner::B,
            PairWinner::B => PairWinner::A,
            PairWinner::Tie => PairWinner::Tie,
        }
    }

    /// Winner set in candidate-index form: A = 0, B = 1, a tie selects nothing.
    pub fn as_indices(self) -> Vec<usize> {
        match self {
            PairWinner::A => vec![0],
            PairWinner::B => vec![1],
            PairWinner::Tie => Vec::new(),
        }
    }
}

impl fmt::Display for PairWinner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairWinner::A => "A",
            PairWinner::B => "B",
            PairWinner::Tie => "tie",
        })
    }
}

/// Presentation order of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairOrder {
    AB,
    BA,
}

/// Which presented slot the judge preferred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Presented {
    First,
    Second,
}

impl PairOrder {
    /// Original label of the response shown in `slot`.
    pub fn label_of(self, slot: Presented) -> PairWinner {
        match (self, slot) {
            (PairOrder::AB, Presented::First) | (PairOrder::BA, Presented::Second) => PairWinner::A,
            (PairOrder::AB, Presented::Second) | (PairOrder::BA, Presented::First) => PairWinner::B,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairItem {
    pub id: String,
    pub question: String,
    pub response_a: String,
    pub response_b: String,
    #[serde(default)]
    pub label: Option<PairLabel>,
    #[serde(default)]
    pub source: Option<String>,
}

impl PairItem {
    pub fn validate(&self) -> Result<(), PairError> {
        let fail = |reason: &str| {
            Err(PairError::InvalidItem {
                id: self.id.clone(),
                reason: reason.to_string(),
            })
        };
        if self.response_a.trim().is_empty() {
            return fail("response_a is empty");
        }
        if self.response_b.trim().is_empty() {
            return fail("response_b is empty");
        }
        if self.question.trim().is_empty() {
            return fail("question is empty");
        }
        Ok(())
    }

    /// Gold winner as a candidate index: A is 0, B is 1.
    pub fn gold(&self) -> Option<usize> {
        self.label.map(|l| match l.winner() {
            PairWinner::B => 1,
            _ => 0,
        })
    }

    /// The same pair with A and B exchanged, gold label included.
    pub fn swapped(&self) -> Self {
        Self {
            id: self.id.clone(),
            question: self.question.clone(),
            response_a: self.response_b.clone(),
            response_b: self.response_a.clone(),
            label: self.label.map(PairLabel::flipped),
            source: self.source.clone(),
        }
    }

    /// Responses in presentation order.
    pub fn presented(&self, order: PairOrder) -> (&str, &str) {
        match order {
            PairOrder::AB => (&self.response_a, &self.response_b),
            PairOrder::BA => (&self.response_b, &self.response_a),
        }
    }
}

/// Keyed judge output: the judge's own resolved answer and the comparison against it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyedVerdict {
    pub winner: PairWinner,
    pub resolved_answer: String,
}

/// Anything that can compare a presented pair and run the keyed two-stage check.
pub trait PairJudge: Send + Sync {
    /// Which presented slot wins; the judge must commit to one.
    fn compare(&self, item: &PairItem, order: PairOrder) -> Result<Presented, JudgeError>;

    fn keyed(&self, item: &PairItem) -> Result<KeyedVerdict, JudgeError>;
}

impl<J: PairJudge + ?Sized> PairJudge for &J {
    fn compare(&self, item: &PairItem, order: PairOrder) -> Result<Presented, JudgeError> {
        (**self).compare(item, order)
    }

    fn keyed(&self, item: &PairItem) -> Result<KeyedVerdict, JudgeError> {
        (**self).keyed(item)
    }
}

/// Full trace of one APOC decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairDecision {
    pub baseline_winner: PairWinner,
    pub swapped_winner: PairWinner,
    pub order_consistent: bool,
    pub keyed_winner: Option<PairWinner>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keyed_answer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keyed_error: Option<String>,
    pub final_winner: PairWinner,
    pub override_applied: bool,
    pub estimation_skipped: bool,
    /// Ordered calls plus at most one keyed check.
    pub judge_calls: usize,
}

impl PairDecision {
    /// Checks the gate invariants every decision must satisfy.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.override_applied && self.keyed_winner != Some(self.final_winner) {
            return Err("override applied without a matching keyed winner".into());
        }
        if self.estimation_skipped && self.final_winner != self.baseline_winner {
            return Err("estimation skip changed the baseline".into());
        }
        if self.final_winner != self.baseline_winner
            && (self.order_consistent
                || self.keyed_winner != Some(self.swapped_winner)
                || self.estimation_skipped)
        {
            return Err("final winner moved off the baseline without keyed confirmation".into());
        }
        if self.order_consistent != (self.baseline_winner == self.swapped_winner) {
            return Err("order_consistent flag disagrees with the two orders".into());
        }
        if self.judge_calls > 3 {
            return Err(format!("call budget exceeded: {}", self.judge_calls));
        }
        Ok(())
    }

    /// Winner set in candidate-index form.
    pub fn winners(&self) -> Vec<usize> {
        self.final_winner.as_indices()
    }
}

fn judge_failure<'a>(item: &'a PairItem, stage: &'static str) -> impl FnOnce(JudgeError) -> PairError + 'a {
    move |source| PairError::Judge {
        id: item.id.clone(),
        stage,
        source,
    }
}

/// One ordered judgement, reported in original A/B labels.
pub fn judge_pair_once<J: PairJudge + ?Sized>(
    item: &PairItem,
    order: PairOrder,
    judge: &J,
) -> Result<PairWinner, PairError> {
    item.validate()?;
    let slot = judge
        .compare(item, order)
        .map_err(judge_failure(item, "ordered"))?;
    Ok(order.label_of(slot))
}

pub fn keyed_judge<J: PairJudge + ?Sized>(item: &PairItem, judge: &J) -> Result<KeyedVerdict, PairError> {
    item.validate()?;
    judge.keyed(item).map_err(judge_failure(item, "keyed"))
}

/// Runs the APOC decision procedure on one pair.
pub fn run_apocjudge<J: PairJudge + ?Sized>(
    item: &PairItem,
    judge: &J,
    detector: &EstimationDetector,
) -> Result<PairDecision, PairError> {
    item.validate()?;
    let (baseline, swapped) = rayon::join(
        || judge_pair_once(item, PairOrder::AB, judge),
        || judge_pair_once(item, PairOrder::BA, judge),
    );
    let (baseline, swapped) = (baseline?, swapped?);

    let mut decision = PairDecision {
        baseline_winner: baseline,
        swapped_winner: swapped,
        order_consistent: baseline == swapped,
        keyed_winner: None,
        keyed_answer: None,
        keyed_error: None,
        final_winner: baseline,
        override_applied: false,
        estimation_skipped: false,
        judge_calls: 2,
    };
    if decision.order_consistent {
        return Ok(decision);
    }
    if detector.fires(item) {
        decision.estimation_skipped = true;
        return Ok(decision);
    }

    decision.judge_calls += 1;
    match keyed_judge(item, judge) {
        Ok(keyed) => {
            decision.keyed_winner = Some(keyed.winner);
            decision.keyed_answer = Some(keyed.resolved_answer);
            if keyed.winner == swapped {
                decision.final_winner = swapped;
                decision.override_applied = true;
            }
        }
        Err(e) => {
            log::warn!("item {}: keyed judge failed, keeping baseline: {e}", item.id);
            decision.keyed_error = Some(e.to_string());
        }
    }
    Ok(decision)
}
