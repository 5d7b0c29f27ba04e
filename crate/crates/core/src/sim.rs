//! Monte Carlo study of majority vote and full consensus under a synthetic
//! order-noisy judge.
//!
//! Each run tops the best candidate (index 0) with probability `q`,
//! independently across runs; otherwise it tops a wrong candidate drawn from
//! `off_target`. Scores are synthetic: every candidate starts at 50, the best
//! one gets `margin` extra, Gaussian noise is added, and the run's top choice
//! is then given the run's maximum score.

use crate::binom::lower_tail;
use crate::consensus::{CandidateVerdict, ConsensusSummary, RunVerdict, DEFAULT_TIE_TOLERANCE, SCORE_MAX, SCORE_MIN};
use crate::eval::{format_p_value, ReportFormat};
use crate::permutation::Permutation;
use crate::seed::splitmix64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

pub const DEFAULT_SIM_SEED: u64 = 7_919;
pub const DEFAULT_MARGIN: f64 = 10.0;
const BASE_SCORE: f64 = 50.0;
const SCORE_MODEL_LABEL: &str = "synthetic: base 50, best +margin, gaussian noise, top choice takes run max";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("bound requires q > 1/2")]
    BoundDomain,
    #[error("q must lie in (0, 1], got {0}")]
    Probability(f64),
    #[error("exact majority error requires odd k, got {0}")]
    EvenK(usize),
    #[error("k must be ≥1")]
    ZeroK,
    #[error("trials must be ≥1")]
    ZeroTrials,
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

/// Order-noisy judge with independent runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticJudgeModel {
    /// Probability a run tops the best candidate.
    pub q: f64,
    pub n: usize,
    /// Weights over the `n − 1` wrong candidates when a run misses.
    pub off_target: Vec<f64>,
    pub score_noise: f64,
    /// Latent score advantage of the best candidate.
    pub margin: f64,
}

impl SyntheticJudgeModel {
    /// Uniform `off_target` and the default margin.
    pub fn uniform(q: f64, n: usize, score_noise: f64) -> Self {
        let wrong = n.saturating_sub(1).max(1);
        Self {
            q,
            n,
            off_target: vec![1.0 / wrong as f64; n.saturating_sub(1)],
            score_noise,
            margin: DEFAULT_MARGIN,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidModel(m));
        if !(self.q > 0.5 && self.q <= 1.0) {
            return bad(format!("q must lie in (0.5, 1], got {}", self.q));
        }
        if self.n < 2 {
            return bad(format!("need ≥2 candidates, got {}", self.n));
        }
        if self.off_target.len() != self.n - 1 {
            return bad(format!(
                "off_target has {} weights for {} wrong candidates",
                self.off_target.len(),
                self.n - 1
            ));
        }
        if self.off_target.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return bad("off_target weights must be finite and ≥0".into());
        }
        let total: f64 = self.off_target.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return bad(format!("off_target must sum to 1, got {total}"));
        }
        if !(self.score_noise.is_finite() && self.score_noise >= 0.0) {
            return bad(format!("score_noise must be ≥0, got {}", self.score_noise));
        }
        if !(self.margin.is_finite() && self.margin >= 0.0) {
            return bad(format!("margin must be ≥0, got {}", self.margin));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub q: f64,
    pub n: usize,
    pub k: usize,
    pub trials: u64,
    pub score_noise: f64,
    pub margin: f64,
    pub majority_errors: u64,
    pub consensus_errors: u64,
    pub empirical_majority_error: f64,
    pub empirical_consensus_error: f64,
    pub hoeffding_bound: f64,
    /// Absent for even `k`.
    pub exact_majority_error: Option<f64>,
    pub score_model: String,
}

impl SimulationResult {
    pub fn majority_std_error(&self) -> f64 {
        binomial_std_error(self.empirical_majority_error, self.trials)
    }

    pub fn consensus_std_error(&self) -> f64 {
        binomial_std_error(self.empirical_consensus_error, self.trials)
    }
}

fn binomial_std_error(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// `exp(−2k(q − ½)²)`.
pub fn hoeffding_bound(q: f64, k: usize) -> Result<f64, SimError> {
    if k == 0 {
        return Err(SimError::ZeroK);
    }
    if q.is_nan() || q <= 0.5 {
        return Err(SimError::BoundDomain);
    }
    if q > 1.0 {
        return Err(SimError::Probability(q));
    }
    Ok((-2.0 * k as f64 * (q - 0.5).powi(2)).exp())
}

/// `P(Σ Z ≤ k/2)` for `Z ~ Bernoulli(q)` over odd `k` runs.
pub fn exact_majority_error(q: f64, k: usize) -> Result<f64, SimError> {
    if k == 0 {
        return Err(SimError::ZeroK);
    }
    if k.is_multiple_of(2) {
        return Err(SimError::EvenK(k));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(SimError::Probability(q));
    }
    Ok(lower_tail(k as u64, (k as u64 - 1) / 2, q))
}

struct TrialOutcome {
    majority_error: bool,
    consensus_error: bool,
}

fn run_trial(model: &SyntheticJudgeModel, off_target: &WeightedIndex<f64>, k: usize, seed: u64) -> TrialOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = model.n;
    let mut successes = 0usize;
    let mut runs = Vec::with_capacity(k);
    for r in 0..k {
        let hit = rng.random::<f64>() < model.q;
        successes += usize::from(hit);
        let top = if hit { 0 } else { 1 + off_target.sample(&mut rng) };

        let mut scores: Vec<f64> = (0..n)
            .map(|i| {
                let latent = BASE_SCORE + if i == 0 { model.margin } else { 0.0 };
                let noise: f64 = rng.sample(StandardNormal);
                (latent + model.score_noise * noise).clamp(SCORE_MIN, SCORE_MAX)
            })
            .collect();
        let argmax = (0..n).fold(0, |m, i| if scores[i] > scores[m] { i } else { m });
        scores.swap(top, argmax);

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            scores[b]
                .total_cmp(&scores[a])
                .then_with(|| (b == top).cmp(&(a == top)))
                .then(a.cmp(&b))
        });
        let mut candidates: Vec<CandidateVerdict> = scores
            .iter()
            .map(|&score| CandidateVerdict {
                score,
                rank: 0,
                major_error: false,
                halluc_specificity: false,
                calibrated_uncertainty: false,
                rationale: String::new(),
            })
            .collect();
        for (rank, &i) in order.iter().enumerate() {
            candidates[i].rank = rank + 1;
        }
        runs.push(
            RunVerdict::new(r + 1, Permutation::identity(n), candidates)
                .expect("synthetic runs are valid by construction"),
        );
    }
    let summary = ConsensusSummary::from_runs(&runs, DEFAULT_TIE_TOLERANCE).expect("non-empty consistent runs");
    TrialOutcome {
        majority_error: 2 * successes <= k,
        consensus_error: summary.winners.len() != 1 || summary.winners.first().map(|c| c.index()) != Some(0),
    }
}

/// Runs `trials` independent trials of `k` runs each. Deterministic in
/// `(model, k, trials, seed)` regardless of thread count.
pub fn simulate(model: &SyntheticJudgeModel, k: usize, trials: u64, seed: u64) -> Result<SimulationResult, SimError> {
    model.validate()?;
    if k == 0 {
        return Err(SimError::ZeroK);
    }
    if trials == 0 {
        return Err(SimError::ZeroTrials);
    }
    let off_target = WeightedIndex::new(&model.off_target)
        .map_err(|e| SimError::InvalidModel(format!("off_target: {e}")))?;
    let (majority_errors, consensus_errors) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let o = run_trial(model, &off_target, k, splitmix64(seed ^ splitmix64(t)));
            (u64::from(o.majority_error), u64::from(o.consensus_error))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(SimulationResult {
        q: model.q,
        n: model.n,
        k,
        trials,
        score_noise: model.score_noise,
        margin: model.margin,
        majority_errors,
        consensus_errors,
        empirical_majority_error: majority_errors as f64 / trials as f64,
        empirical_consensus_error: consensus_errors as f64 / trials as f64,
        hoeffding_bound: hoeffding_bound(model.q, k)?,
        exact_majority_error: if k % 2 == 1 { Some(exact_majority_error(model.q, k)?) } else { None },
        score_model: SCORE_MODEL_LABEL.to_string(),
    })
}

/// Renders simulation results as a fixed-width table, JSONL, or a TSV series.
pub fn render_simulation(results: &[SimulationResult], format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Table => {
            let _ = writeln!(
                out,
                "{:>5} {:>3} {:>3} {:>8} {:>10} {:>10} {:>10} {:>10}",
                "q", "n", "k", "trials", "majority", "consensus", "exact", "bound"
            );
            for r in results {
                let _ = writeln!(
                    out,
                    "{:>5} {:>3} {:>3} {:>8} {:>10.4} {:>10.4} {:>10} {:>10.4}",
                    r.q,
                    r.n,
                    r.k,
                    r.trials,
                    r.empirical_majority_error,
                    r.empirical_consensus_error,
                    r.exact_majority_error.map_or_else(|| "-".to_string(), format_p_value),
                    r.hoeffding_bound
                );
            }
            if let Some(r) = results.first() {
                let _ = writeln!(out, "score model: {}", r.score_model);
            }
        }
        ReportFormat::Jsonl => {
            for r in results {
                out.push_str(&serde_json::to_string(r).expect("results serialize"));
                out.push('\n');
            }
        }
        ReportFormat::PlotData => {
            out.push_str("q\tn\tk\tmajority_error\tconsensus_error\texact_majority_error\thoeffding_bound\n");
            for r in results {
                let exact = r.exact_majority_error.map_or_else(String::new, |e| e.to_string());
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    r.q, r.n, r.k, r.empirical_majority_error, r.empirical_consensus_error, exact, r.hoeffding_bound
                );
            }
        }
    }
    out
}
