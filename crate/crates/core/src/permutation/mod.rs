//! Candidate-order permutations and the fixed run schedule.
//!
//! A [`Permutation`] maps presented positions to original candidate indices:
//! `mapping[p]` is the original index shown at position `p`.

mod run;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use thiserror::Error;

pub use run::{min_successful_runs, run_pcfjudge, PcfError, PcfOutcome, RunFailure};

/// Seed used for the global schedule when none is configured.
pub const DEFAULT_SCHEDULE_SEED: u64 = 20_260_419;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermutationError {
    #[error("mapping is not a bijection on 0..{0}")]
    NotBijection(usize),
    #[error("length mismatch: permutation has {expected} positions, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("listwise requires ≥2 candidates")]
    TooFewCandidates,
    #[error("run count must be at least 1")]
    ZeroRuns,
    #[error("not enough distinct permutations: requested {k}, only {available} exist for n={n}")]
    NotEnoughPermutations { n: usize, k: usize, available: u64 },
}

/// A bijection on `0..n` from presented position to original candidate index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self, PermutationError> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &m in &mapping {
            if m >= n || seen[m] {
                return Err(PermutationError::NotBijection(n));
            }
            seen[m] = true;
        }
        Ok(Self { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mapping: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(p, &m)| p == m)
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    /// Original candidate index shown at presented position `position`.
    pub fn original_at(&self, position: usize) -> usize {
        self.mapping[position]
    }

    /// Presented position of original candidate `original`.
    pub fn position_of(&self, original: usize) -> usize {
        self.mapping
            .iter()
            .position(|&m| m == original)
            .expect("permutation is a bijection")
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.mapping.len()];
        for (p, &m) in self.mapping.iter().enumerate() {
            inv[m] = p;
        }
        Self { mapping: inv }
    }

    /// `self.compose(other)` maps `p` to `self[other[p]]`.
    pub fn compose(&self, other: &Permutation) -> Result<Self, PermutationError> {
        self.check_len(other.len())?;
        Ok(Self {
            mapping: other.mapping.iter().map(|&p| self.mapping[p]).collect(),
        })
    }

    /// Presents `candidates` in this order: output position `p` holds
    /// `candidates[mapping[p]]`.
    pub fn apply<T: Clone>(&self, candidates: &[T]) -> Result<Vec<T>, PermutationError> {
        self.check_len(candidates.len())?;
        Ok(self.mapping.iter().map(|&m| candidates[m].clone()).collect())
    }

    /// Maps per-position outputs back to original candidate order:
    /// `original[mapping[p]] = presented[p]`.
    pub fn remap<T: Clone>(&self, presented: &[T]) -> Result<Vec<T>, PermutationError> {
        self.check_len(presented.len())?;
        let mut slots: Vec<Option<T>> = vec![None; presented.len()];
        for (p, value) in presented.iter().enumerate() {
            slots[self.mapping[p]] = Some(value.clone());
        }
        Ok(slots
            .into_iter()
            .map(|v| v.expect("bijection fills every slot"))
            .collect())
    }

    fn check_len(&self, actual: usize) -> Result<(), PermutationError> {
        if actual != self.mapping.len() {
            return Err(PermutationError::LengthMismatch {
                expected: self.mapping.len(),
                actual,
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = PermutationError;

    fn try_from(mapping: Vec<usize>) -> Result<Self, Self::Error> {
        Self::new(mapping)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.mapping
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, m) in self.mapping.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "]")
    }
}

/// `n!`, saturating at `u64::MAX`.
pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).try_fold(1u64, |acc, x| acc.checked_mul(x)).unwrap_or(u64::MAX)
}

/// K distinct permutations reused across every item with the same `n`.
///
/// The first entry is always the canonical identity order, so a K=1 schedule
/// is a strict prefix of any larger schedule with the same seed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationSchedule {
    n: usize,
    k: usize,
    seed: u64,
    permutations: Vec<Permutation>,
}

impl PermutationSchedule {
    /// Identity first, then `k - 1` distinct shuffles drawn by seeded
    /// rejection sampling.
    pub fn build(n: usize, k: usize, seed: u64) -> Result<Self, PermutationError> {
        if n < 2 {
            return Err(PermutationError::TooFewCandidates);
        }
        if k == 0 {
            return Err(PermutationError::ZeroRuns);
        }
        let available = factorial(n);
        if k as u64 > available {
            return Err(PermutationError::NotEnoughPermutations { n, k, available });
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let identity = Permutation::identity(n);
        let mut permutations = vec![identity.clone()];

        if (k as u64).saturating_mul(2) > available {
            // Dense request: rejection sampling would stall, so shuffle the
            // full enumeration instead.
            let mut rest: Vec<Permutation> = all_permutations(n)
                .into_iter()
                .filter(|p| !p.is_identity())
                .collect();
            rest.shuffle(&mut rng);
            permutations.extend(rest.into_iter().take(k - 1));
        } else {
            let mut seen: HashSet<Vec<usize>> = HashSet::from([identity.mapping.clone()]);
            while permutations.len() < k {
                let mut mapping: Vec<usize> = (0..n).collect();
                mapping.shuffle(&mut rng);
                if seen.insert(mapping.clone()) {
                    permutations.push(Permutation { mapping });
                }
            }
        }

        Ok(Self {
            n,
            k,
            seed,
            permutations,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn permutations(&self) -> &[Permutation] {
        &self.permutations
    }

    /// How many runs present original candidate `original` at position `position`.
    pub fn position_frequency(&self, original: usize, position: usize) -> usize {
        self.permutations
            .iter()
            .filter(|p| p.original_at(position) == original)
            .count()
    }
}

/// All permutations of `0..n` in lexicographic order.
fn all_permutations(n: usize) -> Vec<Permutation> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![Permutation {
        mapping: current.clone(),
    }];
    loop {
        // Standard next-permutation step.
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1]) else {
            return out;
        };
        let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
        out.push(Permutation {
            mapping: current.clone(),
        });
    }
}
