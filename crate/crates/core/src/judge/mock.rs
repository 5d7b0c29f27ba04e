//! Configurable mock listwise judge with position bias and score noise.
//!
//! With probability `bias` the candidate shown first is inflated to the top
//! score; otherwise every candidate is scored at its latent quality plus
//! Gaussian noise, clipped to `[0, 100]`. The ranking follows the emitted
//! scores with ties broken by presented position.

use crate::eval::EvalItem;
use crate::judge::{JudgeError, ListwiseJudge, ListwiseJudgeResponse, PresentedRecord};
use crate::permutation::Permutation;
use crate::seed::derive_seed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::json;

/// Score given to the inflated first-shown candidate; the rest are capped just below.
const INFLATED_SCORE: f64 = 100.0;
const BIASED_CAP: f64 = 99.0;

/// Where the mock's latent per-candidate quality comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LatentQuality {
    /// Gold candidate at `gold`, every other candidate at `others`.
    GoldAnchored { gold: f64, others: f64 },
    /// Fixed quality per original candidate index.
    Explicit { scores: Vec<f64> },
}

impl Default for LatentQuality {
    fn default() -> Self {
        LatentQuality::GoldAnchored {
            gold: 75.0,
            others: 65.0,
        }
    }
}

impl LatentQuality {
    fn for_item(&self, item: &EvalItem) -> Result<Vec<f64>, JudgeError> {
        let n = item.candidates.len();
        match self {
            LatentQuality::GoldAnchored { gold, others } => Ok((0..n)
                .map(|i| if item.gold_index == Some(i) { *gold } else { *others })
                .collect()),
            LatentQuality::Explicit { scores } if scores.len() == n => Ok(scores.clone()),
            LatentQuality::Explicit { scores } => Err(JudgeError::Input(format!(
                "mock latent quality has {} entries but item {} has {n} candidates",
                scores.len(),
                item.id
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockProfile {
    /// Probability of inflating the first-shown candidate.
    #[serde(default)]
    pub bias: f64,
    /// Standard deviation of the additive score noise.
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub latent: LatentQuality,
}

impl Default for MockProfile {
    fn default() -> Self {
        Self {
            bias: 0.0,
            noise: 0.0,
            seed: 0,
            latent: LatentQuality::default(),
        }
    }
}

impl MockProfile {
    pub fn validate(&self) -> Result<(), JudgeError> {
        if !(0.0..=1.0).contains(&self.bias) {
            return Err(JudgeError::Config(format!("bias must be in [0,1], got {}", self.bias)));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(JudgeError::Config(format!("noise must be ≥0, got {}", self.noise)));
        }
        let in_range = |v: &f64| (0.0..=100.0).contains(v);
        let ok = match &self.latent {
            LatentQuality::GoldAnchored { gold, others } => in_range(gold) && in_range(others),
            LatentQuality::Explicit { scores } => scores.iter().all(in_range),
        };
        if !ok {
            return Err(JudgeError::Config("latent qualities must lie in [0,100]".into()));
        }
        Ok(())
    }

    /// Seed for one (item, presented order) request.
    pub(crate) fn request_seed(&self, item: &EvalItem, permutation: &Permutation) -> u64 {
        derive_seed(self.seed, &[item.id.as_bytes(), permutation.to_string().as_bytes()])
    }
}

/// One mock judgement of `item` shown in `permutation` order.
pub fn mock_judge(
    profile: &MockProfile,
    item: &EvalItem,
    permutation: &Permutation,
    seed: u64,
) -> Result<ListwiseJudgeResponse, JudgeError> {
    profile.validate()?;
    let latent = profile.latent.for_item(item)?;
    let presented_latent = permutation.apply(&latent)?;
    let n = presented_latent.len();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let biased = rng.random::<f64>() < profile.bias;
    let mut scores: Vec<f64> = presented_latent
        .iter()
        .map(|&q| {
            let z: f64 = rng.sample(StandardNormal);
            (q + profile.noise * z).clamp(0.0, 100.0)
        })
        .collect();
    if biased {
        for s in scores.iter_mut().skip(1) {
            *s = s.min(BIASED_CAP);
        }
        scores[0] = INFLATED_SCORE;
    }

    let mut ranking: Vec<usize> = (0..n).collect();
    ranking.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));

    let records = scores
        .iter()
        .enumerate()
        .map(|(pos, &score)| PresentedRecord {
            score,
            rationale: if biased && pos == 0 {
                "mock: shown first, inflated".to_string()
            } else {
                format!("mock: latent {:.1}", presented_latent[pos])
            },
            major_error: score < 40.0,
            halluc_specificity: false,
            calibrated_uncertainty: false,
        })
        .collect();

    Ok(ListwiseJudgeResponse {
        records,
        ranking,
        rationale_truncated: false,
    })
}

/// Renders a response in the wire format the parser expects.
pub fn render_listwise_response(response: &ListwiseJudgeResponse) -> String {
    let candidates: Vec<_> = response
        .records
        .iter()
        .enumerate()
        .map(|(pos, r)| {
            json!({
                "position": pos + 1,
                "score": r.score,
                "rationale": r.rationale,
                "major_error": r.major_error,
                "hallucinated_specificity": r.halluc_specificity,
                "calibrated_uncertainty": r.calibrated_uncertainty,
            })
        })
        .collect();
    let ranking: Vec<usize> = response.ranking.iter().map(|p| p + 1).collect();
    let body = json!({ "candidates": candidates, "ranking": ranking });
    format!(
        "```json\n{}\n```\n",
        serde_json::to_string_pretty(&body).expect("response serializes")
    )
}

/// The mock as a direct [`ListwiseJudge`], skipping the text round trip.
#[derive(Debug, Clone, Default)]
pub struct MockJudge {
    pub profile: MockProfile,
}

impl MockJudge {
    pub fn new(profile: MockProfile) -> Self {
        Self { profile }
    }
}

impl ListwiseJudge for MockJudge {
    fn judge(
        &self,
        item: &EvalItem,
        permutation: &Permutation,
    ) -> Result<ListwiseJudgeResponse, JudgeError> {
        let seed = self.profile.request_seed(item, permutation);
        mock_judge(&self.profile, item, permutation, seed)
    }
}
