//! Order-robust LLM judging.
//!
//! A listwise judge is rerun over a fixed schedule of candidate-order
//! permutations; every run is mapped back to the original candidate ids and
//! the runs are folded into a single consensus decision. The crate also
//! carries a pairwise order-swap protocol with keyed confirmation, the
//! evaluation pipeline (dataset slices, micro/macro accuracy, exact sign
//! tests, reports) and a Monte Carlo simulator for the majority-vote error
//! bound.
//!
//! Module map:
//!
//! * [`consensus`]: per-candidate aggregates and tie-tolerant winner selection.
//! * [`permutation`]: schedules, presentation/remap, and the listwise orchestration loop.
//! * [`judge`]: prompt construction, response parsing, backends, cache, mock judge.
//! * [`pairwise`]: order-swapped pairwise judging with keyed confirmation.
//! * [`eval`]: datasets, metrics, significance tests, prediction files and reports.
//! * [`sim`]: synthetic order-noisy judges and bound validation.

pub mod consensus;
pub mod eval;
pub mod judge;
pub mod pairwise;
pub mod permutation;
pub mod sim;

mod binom;
mod seed;

pub use consensus::{CandidateId, CandidateVerdict, ConsensusError, ConsensusSummary, RunVerdict};
pub use eval::{EvalItem, MetricsReport, PredictionRecord};
pub use judge::{JudgeError, ListwiseJudge, ListwiseJudgeResponse};
pub use pairwise::{PairDecision, PairItem};
pub use permutation::{Permutation, PermutationSchedule};
