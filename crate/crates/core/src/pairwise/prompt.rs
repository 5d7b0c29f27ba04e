use crate::judge::{extract_structured_block, JudgeError};
use crate::pairwise::{PairItem, PairOrder, PairWinner, Presented};
use serde::Deserialize;
use serde_json::{json, Value};

pub const PAIR_TEMPLATE_VERSION: &str = "pairwise-order-v1";
pub const KEYED_TEMPLATE_VERSION: &str = "pairwise-keyed-v1";

fn fenced(value: Value) -> String {
    format!("```json\n{}\n```\n", value)
}

pub fn build_pair_prompt(item: &PairItem, order: PairOrder) -> String {
    let (first, second) = item.presented(order);
    format!(
        "You are judging which of two responses answers the question correctly. \
Focus on objective correctness; ignore style and length. The order of the \
responses carries no information.\n\n\
### Question\n{question}\n\n\
[Response 1]\n{first}\n[End of Response 1]\n\n\
[Response 2]\n{second}\n[End of Response 2]\n\n\
### Output format\n\
Respond with one fenced ```json block: {{\"winner\": 1 or 2, \"rationale\": \"<one sentence>\"}}. \
You must choose exactly one response.\n",
        question = item.question.trim_end(),
        first = first.trim_end(),
        second = second.trim_end(),
    )
}

/// First stage of the keyed judge: answer the question without seeing the responses.
pub fn build_keyed_resolve_prompt(item: &PairItem) -> String {
    format!(
        "Solve the following question yourself. Work carefully, then state your final \
answer concisely.\n\n### Question\n{question}\n\n### Output format\n\
Respond with one fenced ```json block: {{\"answer\": \"<your final answer>\"}}.\n",
        question = item.question.trim_end(),
    )
}

/// Second stage: compare both responses against the resolved answer.
pub fn build_keyed_compare_prompt(item: &PairItem, resolved_answer: &str) -> String {
    format!(
        "A reference answer to the question below has been worked out independently. \
Decide which response agrees with the reference answer.\n\n\
### Question\n{question}\n\n### Reference answer\n{answer}\n\n\
[Response A]\n{a}\n[End of Response A]\n\n\
[Response B]\n{b}\n[End of Response B]\n\n\
### Output format\n\
Respond with one fenced ```json block: {{\"winner\": \"A\", \"B\", or \"neither\"}}. \
Use \"neither\" only when the reference answer supports neither response.\n",
        question = item.question.trim_end(),
        answer = resolved_answer.trim_end(),
        a = item.response_a.trim_end(),
        b = item.response_b.trim_end(),
    )
}

#[derive(Deserialize)]
struct WireWinner {
    winner: Value,
}

#[derive(Deserialize)]
struct WireAnswer {
    answer: String,
}

fn parse_block<T: for<'de> Deserialize<'de>>(raw: &str) -> Result<T, JudgeError> {
    let block = extract_structured_block(raw)?;
    serde_json::from_str(block).map_err(|e| JudgeError::Parse(format!("malformed JSON: {e}")))
}

pub fn parse_pair_response(raw: &str) -> Result<Presented, JudgeError> {
    let wire: WireWinner = parse_block(raw)?;
    match wire.winner.as_u64() {
        Some(1) => Ok(Presented::First),
        Some(2) => Ok(Presented::Second),
        _ => Err(JudgeError::Validation(format!(
            "winner must be 1 or 2, got {}",
            wire.winner
        ))),
    }
}

pub fn parse_keyed_answer(raw: &str) -> Result<String, JudgeError> {
    let wire: WireAnswer = parse_block(raw)?;
    if wire.answer.trim().is_empty() {
        return Err(JudgeError::Validation("resolved answer is empty".into()));
    }
    Ok(wire.answer)
}

pub fn parse_keyed_verdict(raw: &str) -> Result<PairWinner, JudgeError> {
    let wire: WireWinner = parse_block(raw)?;
    match wire.winner.as_str().map(|s| s.trim().to_ascii_lowercase()).as_deref() {
        Some("a") => Ok(PairWinner::A),
        Some("b") => Ok(PairWinner::B),
        Some("neither") => Ok(PairWinner::Tie),
        _ => Err(JudgeError::Validation(format!(
            "keyed winner must be \"A\", \"B\" or \"neither\", got {}",
            wire.winner
        ))),
    }
}

pub fn render_pair_response(slot: Presented) -> String {
    let winner = match slot {
        Presented::First => 1,
        Presented::Second => 2,
    };
    fenced(json!({ "winner": winner, "rationale": "mock" }))
}

pub fn render_keyed_answer(answer: &str) -> String {
    fenced(json!({ "answer": answer }))
}

pub fn render_keyed_verdict(winner: PairWinner) -> String {
    let w = match winner {
        PairWinner::A => "A",
        PairWinner::B => "B",
        PairWinner::Tie => "neither",
    };
    fenced(json!({ "winner": w }))
}
