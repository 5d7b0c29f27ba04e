use crate::eval::metrics::paired_outcomes;
use crate::eval::{
    exact_sign_test, format_p_value, format_percent, macro_by_source, micro_accuracy, paired_comparison,
    Credit, EvalError, PredictionRecord, SourceRow,
};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

/// Per-item correctness change against the baseline: -1, 0 or +1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemDelta {
    pub item_id: String,
    pub delta: i8,
}

/// Metrics for one method over one slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub method: String,
    pub n_items: usize,
    /// Top-hit micro accuracy.
    pub micro_accuracy: f64,
    pub exact_top1_accuracy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub macro_by_source: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_source: Vec<SourceRow>,
    #[serde(default)]
    pub failed_items: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub improved: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regressed: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign_test_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub item_deltas: Vec<ItemDelta>,
}

/// Scores `predictions` and, when a baseline run is given, the paired
/// comparison against it. Macro accuracy is emitted only when every item
/// carries a source bucket.
pub fn build_report(
    method: &str,
    predictions: &[PredictionRecord],
    baseline: Option<(&str, &[PredictionRecord])>,
) -> Result<MetricsReport, EvalError> {
    let micro = micro_accuracy(predictions, Credit::TopHit)?;
    let exact = micro_accuracy(predictions, Credit::ExactTop1)?;
    let (macro_acc, per_source) = if predictions.iter().all(|p| p.source.is_some()) {
        let (m, rows) = macro_by_source(predictions, Credit::TopHit)?;
        (Some(m), rows)
    } else {
        (None, Vec::new())
    };
    let mut report = MetricsReport {
        method: method.to_string(),
        n_items: predictions.len(),
        micro_accuracy: micro,
        exact_top1_accuracy: exact,
        macro_by_source: macro_acc,
        per_source,
        failed_items: predictions.iter().filter(|p| p.error.is_some()).count(),
        baseline: None,
        improved: None,
        regressed: None,
        sign_test_p: None,
        item_deltas: Vec::new(),
    };
    if let Some((name, base)) = baseline {
        let counts = paired_comparison(base, predictions, Credit::TopHit)?;
        report.baseline = Some(name.to_string());
        report.improved = Some(counts.improved);
        report.regressed = Some(counts.regressed);
        report.sign_test_p = match counts.discordant() {
            0 => None,
            _ => Some(exact_sign_test(counts.improved as u64, counts.regressed as u64)?),
        };
        report.item_deltas = paired_outcomes(base, predictions, Credit::TopHit)?
            .into_iter()
            .map(|(id, b, t)| ItemDelta {
                item_id: id.to_string(),
                delta: i8::from(t) - i8::from(b),
            })
            .collect();
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Jsonl,
    PlotData,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "jsonl" => Ok(ReportFormat::Jsonl),
            "plot-data" | "plot_data" => Ok(ReportFormat::PlotData),
            other => Err(format!("unknown report format {other:?}")),
        }
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

fn render_table(reports: &[MetricsReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:>6} {:>8} {:>10} {:>7}  {:<12} {:>8} {:>9} {:>10}",
        "method", "items", "top-hit", "exact-top1", "macro", "baseline", "improved", "regressed", "sign-p"
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:<16} {:>6} {:>8} {:>10} {:>7}  {:<12} {:>8} {:>9} {:>10}",
            r.method,
            r.n_items,
            format_percent(r.micro_accuracy),
            format_percent(r.exact_top1_accuracy),
            opt(r.macro_by_source.map(format_percent)),
            opt(r.baseline.as_deref()),
            opt(r.improved),
            opt(r.regressed),
            opt(r.sign_test_p.map(format_p_value)),
        );
    }
    if reports.iter().any(|r| !r.per_source.is_empty()) {
        let _ = writeln!(out);
        let _ = writeln!(out, "{:<16} {:<20} {:>6} {:>8}", "method", "source", "items", "top-hit");
        for r in reports {
            for row in &r.per_source {
                let _ = writeln!(
                    out,
                    "{:<16} {:<20} {:>6} {:>8}",
                    r.method,
                    row.source,
                    row.n,
                    format_percent(row.accuracy)
                );
            }
        }
    }
    out
}

fn render_plot_data(reports: &[MetricsReport]) -> String {
    let mut out = String::from("method\tbaseline\titem_id\tdelta\n");
    for r in reports {
        let Some(base) = &r.baseline else { continue };
        for d in &r.item_deltas {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", r.method, base, d.item_id, d.delta);
        }
    }
    out
}

/// Renders reports deterministically: same reports, same bytes.
pub fn render_report(reports: &[MetricsReport], format: ReportFormat) -> Result<String, EvalError> {
    Ok(match format {
        ReportFormat::Table => render_table(reports),
        ReportFormat::PlotData => render_plot_data(reports),
        ReportFormat::Jsonl => {
            let mut out = String::new();
            for r in reports {
                out.push_str(&serde_json::to_string(r).map_err(|e| EvalError::Serialization(e.to_string()))?);
                out.push('\n');
            }
            out
        }
    })
}

pub fn emit_report(reports: &[MetricsReport], format: ReportFormat, path: &Path) -> Result<(), EvalError> {
    let text = render_report(reports, format)?;
    std::fs::write(path, text).map_err(EvalError::io(path))
}

/// Reads a metrics JSONL file as written by [`emit_report`].
pub fn read_metrics(path: &Path) -> Result<Vec<MetricsReport>, EvalError> {
    let text = std::fs::read_to_string(path).map_err(EvalError::io(path))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| EvalError::Dataset {
                path: path.to_path_buf(),
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}
