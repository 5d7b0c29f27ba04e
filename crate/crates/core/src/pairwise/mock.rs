//! Mock pairwise judge.
//!
//! Draws are seeded from the presented content, so the same two texts shown
//! in the same slots always get the same verdict regardless of which one is
//! labelled A.

use crate::judge::JudgeError;
use crate::pairwise::{PairItem, PairOrder, PairWinner, Presented};
use crate::seed::derive_seed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const UNRESOLVED_ANSWER: &str = "The answer cannot be determined.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockPairProfile {
    /// Probability of picking the gold winner when not position-biased.
    #[serde(default = "default_accuracy")]
    pub accuracy: f64,
    /// Probability of picking whichever response is shown first.
    #[serde(default = "default_position_bias")]
    pub position_bias: f64,
    /// Probability that the keyed judge resolves the question correctly.
    #[serde(default = "default_accuracy")]
    pub keyed_accuracy: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_accuracy() -> f64 {
    0.8
}

fn default_position_bias() -> f64 {
    0.2
}

impl Default for MockPairProfile {
    fn default() -> Self {
        Self {
            accuracy: default_accuracy(),
            position_bias: default_position_bias(),
            keyed_accuracy: default_accuracy(),
            seed: 0,
        }
    }
}

impl MockPairProfile {
    pub fn validate(&self) -> Result<(), JudgeError> {
        for (name, p) in [
            ("accuracy", self.accuracy),
            ("position_bias", self.position_bias),
            ("keyed_accuracy", self.keyed_accuracy),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(JudgeError::Config(format!("{name} must be in [0,1], got {p}")));
            }
        }
        Ok(())
    }
}

fn gold_texts(item: &PairItem) -> Result<(&str, &str), JudgeError> {
    match item.label.map(|l| l.winner()) {
        Some(PairWinner::A) => Ok((&item.response_a, &item.response_b)),
        Some(PairWinner::B) => Ok((&item.response_b, &item.response_a)),
        _ => Err(JudgeError::Input(format!("mock pair judge needs a gold label on {}", item.id))),
    }
}

pub fn mock_pair_compare(
    profile: &MockPairProfile,
    item: &PairItem,
    order: PairOrder,
) -> Result<Presented, JudgeError> {
    profile.validate()?;
    let (winner_text, _) = gold_texts(item)?;
    let (first, second) = item.presented(order);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
        profile.seed,
        &[b"compare", item.id.as_bytes(), first.as_bytes(), second.as_bytes()],
    ));
    if rng.random::<f64>() < profile.position_bias {
        return Ok(Presented::First);
    }
    let picks_gold = rng.random::<f64>() < profile.accuracy;
    let gold_slot = if first == winner_text {
        Presented::First
    } else {
        Presented::Second
    };
    Ok(match (picks_gold, gold_slot) {
        (true, slot) => slot,
        (false, Presented::First) => Presented::Second,
        (false, Presented::Second) => Presented::First,
    })
}

/// The keyed judge's own answer: the gold response text when it resolves
/// correctly, otherwise the wrong response or an unresolved statement.
pub fn mock_keyed_answer(profile: &MockPairProfile, item: &PairItem) -> Result<String, JudgeError> {
    profile.validate()?;
    let (winner_text, loser_text) = gold_texts(item)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
        profile.seed,
        &[b"keyed", item.id.as_bytes(), item.question.as_bytes()],
    ));
    if rng.random::<f64>() < profile.keyed_accuracy {
        return Ok(winner_text.to_string());
    }
    Ok(if rng.random::<f64>() < 0.5 {
        loser_text.to_string()
    } else {
        UNRESOLVED_ANSWER.to_string()
    })
}

/// Which response matches the resolved answer verbatim; neither → tie.
pub fn mock_keyed_compare(item: &PairItem, resolved_answer: &str) -> PairWinner {
    let answer = resolved_answer.trim();
    if answer == item.response_a.trim() {
        PairWinner::A
    } else if answer == item.response_b.trim() {
        PairWinner::B
    } else {
        PairWinner::Tie
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairwise::PairLabel;

    fn item() -> PairItem {
        PairItem {
            id: "m".into(),
            question: "q".into(),
            response_a: "right".into(),
            response_b: "wrong".into(),
            label: Some(PairLabel::AOverB),
            source: None,
        }
    }

    #[test]
    fn fully_biased_mock_always_picks_first() {
        let p = MockPairProfile {
            position_bias: 1.0,
            ..MockPairProfile::default()
        };
        for order in [PairOrder::AB, PairOrder::BA] {
            assert_eq!(mock_pair_compare(&p, &item(), order).unwrap(), Presented::First);
        }
    }

    #[test]
    fn accurate_unbiased_mock_follows_content() {
        let p = MockPairProfile {
            position_bias: 0.0,
            accuracy: 1.0,
            ..MockPairProfile::default()
        };
        assert_eq!(mock_pair_compare(&p, &item(), PairOrder::AB).unwrap(), Presented::First);
        assert_eq!(mock_pair_compare(&p, &item(), PairOrder::BA).unwrap(), Presented::Second);
    }

    #[test]
    fn keyed_compare_matches_text() {
        assert_eq!(mock_keyed_compare(&item(), " right "), PairWinner::A);
        assert_eq!(mock_keyed_compare(&item(), "wrong"), PairWinner::B);
        assert_eq!(mock_keyed_compare(&item(), "something else"), PairWinner::Tie);
    }

    #[test]
    fn unlabelled_items_are_rejected() {
        let mut it = item();
        it.label = None;
        assert!(mock_pair_compare(&MockPairProfile::default(), &it, PairOrder::AB).is_err());
    }
}
