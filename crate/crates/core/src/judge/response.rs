use crate::judge::{JudgeError, ListwiseJudgeResponse};
use serde::{Deserialize, Serialize};

/// One presented candidate's record as returned by the judge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresentedRecord {
    pub score: f64,
    pub rationale: String,
    pub major_error: bool,
    #[serde(rename = "hallucinated_specificity")]
    pub halluc_specificity: bool,
    pub calibrated_uncertainty: bool,
}

#[derive(Deserialize)]
struct WireRecord {
    position: usize,
    score: f64,
    #[serde(default)]
    rationale: String,
    major_error: bool,
    hallucinated_specificity: bool,
    calibrated_uncertainty: bool,
}

#[derive(Deserialize)]
struct WireResponse {
    candidates: Vec<WireRecord>,
    ranking: Vec<usize>,
}

/// Pulls the single structured JSON block out of a judge's free text.
///
/// Accepts exactly one fenced block (any info string) or, failing that, a
/// body that is itself a bare JSON object.
pub(crate) fn extract_structured_block(raw: &str) -> Result<&str, JudgeError> {
    let mut blocks = Vec::new();
    let mut rest = raw;
    while let Some(open) = rest.find("```") {
        let after_fence = &rest[open + 3..];
        let Some(line_end) = after_fence.find('\n') else {
            break;
        };
        let body = &after_fence[line_end + 1..];
        let Some(close) = body.find("```") else {
            return Err(JudgeError::Parse("unterminated fenced block".into()));
        };
        blocks.push(&body[..close]);
        rest = &body[close + 3..];
    }
    match blocks.len() {
        1 => Ok(blocks[0].trim()),
        0 => {
            let trimmed = raw.trim();
            if trimmed.starts_with('{') && trimmed.ends_with('}') {
                Ok(trimmed)
            } else {
                Err(JudgeError::Parse("no structured block found".into()))
            }
        }
        k => Err(JudgeError::Parse(format!("expected one structured block, found {k}"))),
    }
}

/// Truncates to at most `limit` characters; reports whether anything was cut.
pub(crate) fn truncate_chars(text: String, limit: usize) -> (String, bool) {
    match text.char_indices().nth(limit) {
        Some((cut, _)) => (text[..cut].to_string(), true),
        None => (text, false),
    }
}

/// Parses and validates a listwise judge response for `n` presented candidates.
///
/// Structural problems yield [`JudgeError::Parse`]; a well-formed block
/// with out-of-contract content yields [`JudgeError::Validation`]. Nothing
/// is repaired.
pub fn parse_listwise_response(
    raw: &str,
    n: usize,
    rationale_limit: usize,
) -> Result<ListwiseJudgeResponse, JudgeError> {
    let block = extract_structured_block(raw)?;
    let wire: WireResponse =
        serde_json::from_str(block).map_err(|e| JudgeError::Parse(format!("malformed JSON: {e}")))?;

    if wire.candidates.len() != n {
        return Err(JudgeError::Validation(format!(
            "expected {n} candidate records, got {}",
            wire.candidates.len()
        )));
    }

    let mut slots: Vec<Option<PresentedRecord>> = vec![None; n];
    let mut truncated = false;
    for rec in wire.candidates {
        if rec.position == 0 || rec.position > n || slots[rec.position - 1].is_some() {
            return Err(JudgeError::Validation(format!(
                "invalid or duplicate candidate position {}",
                rec.position
            )));
        }
        if !rec.score.is_finite() || !(0.0..=100.0).contains(&rec.score) {
            return Err(JudgeError::Validation(format!("score out of range: {}", rec.score)));
        }
        let (rationale, cut) = truncate_chars(rec.rationale, rationale_limit);
        truncated |= cut;
        slots[rec.position - 1] = Some(PresentedRecord {
            score: rec.score,
            rationale,
            major_error: rec.major_error,
            halluc_specificity: rec.hallucinated_specificity,
            calibrated_uncertainty: rec.calibrated_uncertainty,
        });
    }

    if wire.ranking.len() != n {
        return Err(JudgeError::Validation("invalid ranking".into()));
    }
    let mut seen = vec![false; n];
    let mut ranking = Vec::with_capacity(n);
    for &label in &wire.ranking {
        if label == 0 || label > n || seen[label - 1] {
            return Err(JudgeError::Validation("invalid ranking".into()));
        }
        seen[label - 1] = true;
        ranking.push(label - 1);
    }

    Ok(ListwiseJudgeResponse {
        records: slots.into_iter().map(|s| s.expect("all positions filled")).collect(),
        ranking,
        rationale_truncated: truncated,
    })
}
