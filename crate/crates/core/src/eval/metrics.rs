use crate::eval::{EvalError, PredictionRecord};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

/// How a winner set earns credit against the gold candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Credit {
    /// Winner set is exactly `{gold}`.
    ExactTop1,
    /// Gold is contained in the winner set.
    #[default]
    TopHit,
}

impl FromStr for Credit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact_top1" | "exact-top1" => Ok(Credit::ExactTop1),
            "top_hit" | "top-hit" => Ok(Credit::TopHit),
            other => Err(format!("unknown credit rule {other:?}")),
        }
    }
}

pub(crate) fn credited(record: &PredictionRecord, credit: Credit) -> Result<bool, EvalError> {
    let gold = record
        .gold
        .ok_or_else(|| EvalError::MissingGold(record.item_id.clone()))?;
    Ok(match credit {
        Credit::ExactTop1 => record.winners == [gold],
        Credit::TopHit => record.winners.contains(&gold),
    })
}

/// Mean credit over all predictions.
pub fn micro_accuracy(predictions: &[PredictionRecord], credit: Credit) -> Result<f64, EvalError> {
    if predictions.is_empty() {
        return Err(EvalError::NoPredictions);
    }
    let mut correct = 0usize;
    for p in predictions {
        correct += usize::from(credited(p, credit)?);
    }
    Ok(correct as f64 / predictions.len() as f64)
}

/// Accuracy within one source bucket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRow {
    pub source: String,
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
}

/// Unweighted mean of per-source accuracies, plus the per-source table in
/// source-name order.
pub fn macro_by_source(predictions: &[PredictionRecord], credit: Credit) -> Result<(f64, Vec<SourceRow>), EvalError> {
    if predictions.is_empty() {
        return Err(EvalError::NoPredictions);
    }
    let mut buckets: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for p in predictions {
        let source = p
            .source
            .as_deref()
            .ok_or_else(|| EvalError::MissingSource(p.item_id.clone()))?;
        let entry = buckets.entry(source).or_default();
        entry.0 += 1;
        entry.1 += usize::from(credited(p, credit)?);
    }
    let rows: Vec<SourceRow> = buckets
        .into_iter()
        .map(|(source, (n, correct))| SourceRow {
            source: source.to_string(),
            n,
            correct,
            accuracy: correct as f64 / n as f64,
        })
        .collect();
    let macro_acc = rows.iter().map(|r| r.accuracy).sum::<f64>() / rows.len() as f64;
    Ok((macro_acc, rows))
}

/// Paired outcome counts between a baseline and a treatment run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PairedCounts {
    /// Baseline wrong, treatment right.
    pub improved: usize,
    /// Baseline right, treatment wrong.
    pub regressed: usize,
    pub both_right: usize,
    pub both_wrong: usize,
}

impl PairedCounts {
    pub fn discordant(&self) -> usize {
        self.improved + self.regressed
    }
}

fn index_by_id<'a>(
    run: &'a [PredictionRecord],
    which: &str,
) -> Result<BTreeMap<&'a str, &'a PredictionRecord>, EvalError> {
    let mut map = BTreeMap::new();
    for p in run {
        if map.insert(p.item_id.as_str(), p).is_some() {
            return Err(EvalError::IdMismatch(format!("{which} run repeats item {}", p.item_id)));
        }
    }
    Ok(map)
}

/// Per-item correctness deltas (`treatment − baseline`), matched by item id.
pub(crate) fn paired_outcomes<'a>(
    baseline: &'a [PredictionRecord],
    treatment: &'a [PredictionRecord],
    credit: Credit,
) -> Result<Vec<(&'a str, bool, bool)>, EvalError> {
    let base = index_by_id(baseline, "baseline")?;
    let treat = index_by_id(treatment, "treatment")?;
    let base_ids: BTreeSet<_> = base.keys().collect();
    let treat_ids: BTreeSet<_> = treat.keys().collect();
    if base_ids != treat_ids {
        let only_base = base_ids.difference(&treat_ids).count();
        let only_treat = treat_ids.difference(&base_ids).count();
        return Err(EvalError::IdMismatch(format!(
            "{only_base} ids only in baseline, {only_treat} only in treatment"
        )));
    }
    base.iter()
        .map(|(id, b)| Ok((*id, credited(b, credit)?, credited(treat[id], credit)?)))
        .collect()
}

pub fn paired_comparison(
    baseline: &[PredictionRecord],
    treatment: &[PredictionRecord],
    credit: Credit,
) -> Result<PairedCounts, EvalError> {
    let mut counts = PairedCounts::default();
    for (_, b, t) in paired_outcomes(baseline, treatment, credit)? {
        match (b, t) {
            (false, true) => counts.improved += 1,
            (true, false) => counts.regressed += 1,
            (true, true) => counts.both_right += 1,
            (false, false) => counts.both_wrong += 1,
        }
    }
    Ok(counts)
}

/// `Σ nᵢ·accᵢ / Σ nᵢ`.
pub fn weighted_average(rows: &[(u64, f64)]) -> Result<f64, EvalError> {
    if rows.is_empty() {
        return Err(EvalError::EmptyRows);
    }
    if let Some(index) = rows.iter().position(|(n, _)| *n == 0) {
        return Err(EvalError::NonPositiveWeight { index });
    }
    let total: u64 = rows.iter().map(|(n, _)| n).sum();
    let sum: f64 = rows.iter().map(|(n, acc)| *n as f64 * acc).sum();
    Ok(sum / total as f64)
}

const ROUNDING_GUARD_DIGITS: u32 = 9;

/// Rounds half away from zero at `decimals` places.
///
/// The value is first snapped to nine decimals so binary representation
/// error (81.085 is stored as 81.08499…) does not decide the tie.
pub fn round_half_up(x: f64, decimals: u32) -> f64 {
    assert!(decimals <= ROUNDING_GUARD_DIGITS);
    if !x.is_finite() {
        return x;
    }
    let snapped = (x * 10f64.powi(ROUNDING_GUARD_DIGITS as i32)).round() as i128;
    let step = 10i128.pow(ROUNDING_GUARD_DIGITS - decimals);
    let magnitude = (snapped.abs() + step / 2) / step;
    let rounded = if snapped < 0 { -magnitude } else { magnitude };
    rounded as f64 / 10f64.powi(decimals as i32)
}

/// Accuracy in `[0,1]` as a percentage with two decimals.
pub fn format_percent(accuracy: f64) -> String {
    format!("{:.2}", round_half_up(accuracy * 100.0, 2))
}

/// P-value to four significant figures.
pub fn format_p_value(p: f64) -> String {
    if p == 0.0 || !p.is_finite() {
        return format!("{p}");
    }
    let exponent = p.abs().log10().floor() as i32;
    if exponent >= -4 {
        let decimals = (3 - exponent).max(0) as usize;
        format!("{p:.decimals$}")
    } else {
        format!("{p:.3e}")
    }
}
