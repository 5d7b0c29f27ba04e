use crate::eval::EvalItem;
use crate::judge::JudgeError;
use crate::permutation::Permutation;

/// Bumped whenever the template text changes; hashed into every cache key.
pub const LISTWISE_TEMPLATE_VERSION: &str = "listwise-factuality-v1";

const PREAMBLE: &str = "\
You are a skeptical factuality judge. Rank the candidate responses below by \
factual reliability, not by helpfulness, length, or polish.

Guidelines:
- Penalize any major factual error heavily.
- Penalize unsupported specificity: precise names, dates, numbers, settings, or \
source claims that are not well supported.
- Treat calibrated uncertainty (appropriate caution about what is known) as a weak \
positive signal only. Do not reward evasive or empty answers.
- Judge each candidate on its content. The order in which candidates appear carries \
no information.";

const OUTPUT_CONTRACT: &str = "\
Respond with exactly one fenced ```json block and nothing else inside it. The JSON \
object must have this shape:

{
  \"candidates\": [
    {
      \"position\": <candidate number as labelled above>,
      \"score\": <number from 0 to 100, higher = more factually reliable>,
      \"rationale\": \"<one or two sentences>\",
      \"major_error\": <true|false>,
      \"hallucinated_specificity\": <true|false>,
      \"calibrated_uncertainty\": <true|false>
    }
  ],
  \"ranking\": [<every candidate number exactly once, most reliable first>]
}

Include one entry in \"candidates\" for every candidate. The ranking must be a strict \
order with no ties.";

/// Factuality-first listwise prompt for one presented ordering of `item`.
pub fn build_listwise_prompt(item: &EvalItem, permutation: &Permutation) -> Result<String, JudgeError> {
    let n = item.candidates.len();
    if n < 2 {
        return Err(JudgeError::Input("listwise requires ≥2 candidates".into()));
    }
    if let Some(i) = item.candidates.iter().position(|c| c.trim().is_empty()) {
        return Err(JudgeError::Input(format!("candidate {i} has empty text")));
    }
    let presented = permutation.apply(&item.candidates)?;

    let mut out = String::new();
    out.push_str(PREAMBLE);
    out.push_str("\n\n### Prompt\n");
    out.push_str(item.prompt.trim_end());
    out.push_str(&format!("\n\n### Candidates ({n})\n"));
    for (pos, text) in presented.iter().enumerate() {
        out.push_str(&format!(
            "\n[Candidate {label}]\n{body}\n[End of Candidate {label}]\n",
            label = pos + 1,
            body = text.trim_end()
        ));
    }
    out.push_str("\n### Output format\n");
    out.push_str(OUTPUT_CONTRACT);
    out.push('\n');
    Ok(out)
}

/// Re-prompt sent once after a response fails parsing or validation.
pub fn corrective_prompt(original: &str, problem: &str) -> String {
    format!(
        "{original}\n### Correction\nYour previous response was rejected: {problem}. \
Answer again, following the output format exactly.\n"
    )
}
