#![allow(dead_code)]

use pcfjudge::consensus::{
    consensus_score, select_winners, BORDA_WEIGHT, MEAN_SCORE_WEIGHT, TOP_VOTE_WEIGHT, UNCERTAINTY_WEIGHT,
};
use pcfjudge::eval::{run_listwise, run_pairwise, write_predictions, ExperimentOptions, PredictionRecord};
use pcfjudge::judge::{
    parse_listwise_response, JudgeClient, ListwiseGateway, MockBackend, MockProfile, ResponseCache,
};
use pcfjudge::pairwise::{
    parse_keyed_answer, parse_keyed_verdict, parse_pair_response, run_apocjudge, EstimationDetector,
    KeyedVerdict, MockPairProfile, PairDecision, PairGateway, PairItem, PairJudge, PairLabel, PairOrder,
    PairWinner, Presented,
};
use pcfjudge::{CandidateId, CandidateVerdict, ConsensusSummary, EvalItem, JudgeError, Permutation, RunVerdict};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

pub const PROPERTY_CASES: u32 = 1_000;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

// ---------------------------------------------------------------------------
// Aggregation properties

fn verdict(score: f64, rank: usize, uncertain: bool) -> CandidateVerdict {
    CandidateVerdict {
        score,
        rank,
        major_error: false,
        halluc_specificity: false,
        calibrated_uncertainty: uncertain,
        rationale: String::new(),
    }
}

fn score() -> impl Strategy<Value = f64> {
    // Integer scores make within-run ties common.
    prop_oneof![(0u8..=100).prop_map(f64::from), 0.0f64..=100.0]
}

fn shuffled(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn arb_run(n: usize, run_index: usize) -> impl Strategy<Value = RunVerdict> {
    (
        proptest::collection::vec(score(), n),
        shuffled(n),
        shuffled(n),
        proptest::collection::vec(any::<bool>(), n),
    )
        .prop_map(move |(scores, ranks, mapping, unsure)| {
            let candidates = (0..n).map(|i| verdict(scores[i], ranks[i] + 1, unsure[i])).collect();
            RunVerdict::new(run_index, Permutation::new(mapping).unwrap(), candidates).unwrap()
        })
}

/// Valid run sets with n ∈ [2, 8] and K ∈ [1, 9].
pub fn arb_runs() -> impl Strategy<Value = Vec<RunVerdict>> {
    (2usize..=8, 1usize..=9)
        .prop_flat_map(|(n, k)| (1..=k).map(|r| arb_run(n, r)).collect::<Vec<_>>())
}

fn summarize(runs: &[RunVerdict]) -> Result<ConsensusSummary, TestCaseError> {
    ConsensusSummary::from_runs(runs, 0.5).map_err(|e| TestCaseError::fail(e.to_string()))
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

pub fn check_run_order_invariance(runs: Vec<RunVerdict>, shuffle_seed: u64) -> Result<(), TestCaseError> {
    let base = summarize(&runs)?;
    let mut reordered = runs;
    reordered.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle_seed));
    let other = summarize(&reordered)?;
    prop_assert_eq!(bits(&base.mean_score), bits(&other.mean_score));
    prop_assert_eq!(bits(&base.borda), bits(&other.borda));
    prop_assert_eq!(bits(&base.top_vote), bits(&other.top_vote));
    prop_assert_eq!(bits(&base.uncertainty_share), bits(&other.uncertainty_share));
    prop_assert_eq!(bits(&base.consensus), bits(&other.consensus));
    prop_assert_eq!(base.winners, other.winners);
    Ok(())
}

pub fn check_vote_conservation(runs: Vec<RunVerdict>) -> Result<(), TestCaseError> {
    let s = summarize(&runs)?;
    let total: f64 = s.top_vote.iter().sum();
    prop_assert!((total - 1.0).abs() <= 1e-9, "Σv = {}", total);
    Ok(())
}

pub fn check_range_preservation(runs: Vec<RunVerdict>) -> Result<(), TestCaseError> {
    let s = summarize(&runs)?;
    let within = |v: &[f64], hi: f64| v.iter().all(|x| (0.0..=hi).contains(x));
    prop_assert!(within(&s.mean_score, 100.0), "mean {:?}", s.mean_score);
    prop_assert!(within(&s.borda, 100.0), "borda {:?}", s.borda);
    prop_assert!(within(&s.consensus, 100.0), "C {:?}", s.consensus);
    prop_assert!(within(&s.top_vote, 1.0), "v {:?}", s.top_vote);
    prop_assert!(within(&s.uncertainty_share, 1.0), "u {:?}", s.uncertainty_share);
    prop_assert!(s.winners.contains(&s.argmax()));
    Ok(())
}

/// Presentation followed by remap is the identity, and so is applying a
/// permutation and then its inverse.
pub fn check_remap_round_trip(mapping: Vec<usize>, values: Vec<u32>) -> Result<(), TestCaseError> {
    let p = Permutation::new(mapping).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let values = &values[..p.len()];
    let presented = p.apply(values).unwrap();
    prop_assert_eq!(p.remap(&presented).unwrap(), values.to_vec());
    prop_assert_eq!(p.apply(&p.remap(values).unwrap()).unwrap(), values.to_vec());
    prop_assert_eq!(p.inverse().apply(&presented).unwrap(), values.to_vec());
    for pos in 0..p.len() {
        prop_assert_eq!(p.position_of(p.original_at(pos)), pos);
    }
    Ok(())
}

pub fn arb_permutation_case() -> impl Strategy<Value = (Vec<usize>, Vec<u32>)> {
    (1usize..=8).prop_flat_map(|n| (shuffled(n), proptest::collection::vec(any::<u32>(), n)))
}

/// The combination uses exactly the published weights, both standalone and
/// inside a full summary.
pub fn check_weight_exactness(runs: Vec<RunVerdict>) -> Result<(), TestCaseError> {
    prop_assert_eq!(
        (MEAN_SCORE_WEIGHT, BORDA_WEIGHT, TOP_VOTE_WEIGHT, UNCERTAINTY_WEIGHT),
        (0.50, 0.25, 0.20, 0.05)
    );
    prop_assert_eq!(MEAN_SCORE_WEIGHT + BORDA_WEIGHT + TOP_VOTE_WEIGHT + UNCERTAINTY_WEIGHT, 1.0);
    let s = summarize(&runs)?;
    for i in 0..s.n() {
        let expected = 0.50 * s.mean_score[i]
            + 0.25 * s.borda[i]
            + 0.20 * (100.0 * s.top_vote[i])
            + 0.05 * (100.0 * s.uncertainty_share[i]);
        prop_assert!((s.consensus[i] - expected).abs() <= 1e-9, "C_{} = {} vs {}", i, s.consensus[i], expected);
    }
    let recomputed = consensus_score(&s.mean_score, &s.borda, &s.top_vote, &s.uncertainty_share).unwrap();
    prop_assert_eq!(bits(&recomputed), bits(&s.consensus));
    Ok(())
}

/// Candidate `winner` has the strict top score and rank 1 in every run, and
/// uncertainty flags are uniform: it must be the only winner at tolerance 0.
pub fn check_unanimity(runs: Vec<RunVerdict>, winner_seed: usize, uniform_flag: bool) -> Result<(), TestCaseError> {
    let n = runs[0].n();
    let w = winner_seed % n;
    let rebuilt: Vec<RunVerdict> = runs
        .iter()
        .map(|r| {
            let mut cands: Vec<CandidateVerdict> = r.candidates().to_vec();
            let max_other = cands
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != w)
                .map(|(_, c)| c.score)
                .fold(0.0, f64::max);
            let old_rank = cands[w].rank;
            for c in cands.iter_mut() {
                if c.rank == 1 {
                    c.rank = old_rank;
                }
                c.calibrated_uncertainty = uniform_flag;
                c.score = c.score.min(99.0);
            }
            cands[w].rank = 1;
            cands[w].score = (max_other.min(99.0) + 1.0).min(100.0);
            RunVerdict::new(r.run_index(), r.permutation().clone(), cands).unwrap()
        })
        .collect();
    let s = summarize(&rebuilt)?;
    let winners = select_winners(&s.consensus, 0.0).unwrap();
    prop_assert_eq!(winners, BTreeSet::from([CandidateId(w)]));
    Ok(())
}

/// Single run whose ranks follow its scores: the consensus winner lies in
/// the run's top set, and equals it when the top score is unique.
pub fn check_single_run_consistency(runs: Vec<RunVerdict>) -> Result<(), TestCaseError> {
    let run = &runs[0];
    let scores = run.scores();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut cands: Vec<CandidateVerdict> = run.candidates().to_vec();
    for (rank, &i) in order.iter().enumerate() {
        cands[i].rank = rank + 1;
        cands[i].calibrated_uncertainty = false;
    }
    let consistent = RunVerdict::new(1, run.permutation().clone(), cands).unwrap();
    let s = summarize(std::slice::from_ref(&consistent))?;
    prop_assert!(s.winners.is_subset(consistent.top_set()), "{:?} ⊄ {:?}", s.winners, consistent.top_set());
    if consistent.top_set().len() == 1 {
        prop_assert_eq!(&s.winners, consistent.top_set());
    }
    Ok(())
}

/// Shifting every score by δ moves the means by δ and nothing else.
pub fn check_affine_shift(runs: Vec<RunVerdict>, delta: f64) -> Result<(), TestCaseError> {
    let base = summarize(&runs)?;
    let limit = 100.0 - delta;
    let squeezed: Vec<RunVerdict> = runs
        .iter()
        .map(|r| {
            let cands = r
                .candidates()
                .iter()
                .map(|c| verdict((c.score * limit / 100.0).min(limit), c.rank, c.calibrated_uncertainty))
                .collect();
            RunVerdict::new(r.run_index(), r.permutation().clone(), cands).unwrap()
        })
        .collect();
    let shifted: Vec<RunVerdict> = squeezed
        .iter()
        .map(|r| {
            let cands = r
                .candidates()
                .iter()
                .map(|c| verdict((c.score + delta).min(100.0), c.rank, c.calibrated_uncertainty))
                .collect();
            RunVerdict::new(r.run_index(), r.permutation().clone(), cands).unwrap()
        })
        .collect();
    let a = summarize(&squeezed)?;
    let b = summarize(&shifted)?;
    for i in 0..a.n() {
        prop_assert!((b.mean_score[i] - a.mean_score[i] - delta).abs() <= 1e-9);
    }
    prop_assert_eq!(bits(&a.borda), bits(&b.borda));
    prop_assert_eq!(bits(&base.borda), bits(&b.borda));
    prop_assert_eq!(&a.top_vote, &b.top_vote);
    prop_assert_eq!(&a.winners, &b.winners);
    Ok(())
}

// ---------------------------------------------------------------------------
// Scripted pairwise scenarios

/// Pairwise judge with fixed answers per order and per keyed stage.
pub struct ScriptedPair {
    pub ab: Presented,
    pub ba: Presented,
    pub keyed: Result<PairWinner, JudgeError>,
    pub compare_calls: AtomicUsize,
    pub keyed_calls: AtomicUsize,
}

impl ScriptedPair {
    pub fn new(ab: Presented, ba: Presented, keyed: Result<PairWinner, JudgeError>) -> Self {
        Self {
            ab,
            ba,
            keyed,
            compare_calls: AtomicUsize::new(0),
            keyed_calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> (usize, usize) {
        (self.compare_calls.load(Ordering::SeqCst), self.keyed_calls.load(Ordering::SeqCst))
    }
}

impl PairJudge for ScriptedPair {
    fn compare(&self, _: &PairItem, order: PairOrder) -> Result<Presented, JudgeError> {
        self.compare_calls.fetch_add(1, Ordering::SeqCst);
        Ok(match order {
            PairOrder::AB => self.ab,
            PairOrder::BA => self.ba,
        })
    }

    fn keyed(&self, _: &PairItem) -> Result<KeyedVerdict, JudgeError> {
        self.keyed_calls.fetch_add(1, Ordering::SeqCst);
        self.keyed.clone().map(|winner| KeyedVerdict {
            winner,
            resolved_answer: format!("resolved:{winner}"),
        })
    }
}

pub fn pair_item(question: &str) -> PairItem {
    PairItem {
        id: "scripted".into(),
        question: question.into(),
        response_a: "first answer".into(),
        response_b: "second answer".into(),
        label: Some(PairLabel::AOverB),
        source: None,
    }
}

type ScenarioSpec = (&'static str, &'static str, Presented, Presented, Result<PairWinner, JudgeError>, PairWinner);

pub struct Scenario {
    pub name: &'static str,
    pub decision: PairDecision,
    pub compare_calls: usize,
    pub keyed_calls: usize,
    pub expected_final: PairWinner,
}

/// Every branch of the decision procedure, including keyed failure and a
/// keyed tie.
pub fn apoc_scenarios() -> Vec<Scenario> {
    use Presented::{First, Second};
    let plain = "Which city hosted the 1992 Summer Olympics?";
    let estimate = "Roughly how many piano tuners work in Chicago?";
    let cases: Vec<ScenarioSpec> = vec![
        ("consistent A", plain, First, Second, Ok(PairWinner::B), PairWinner::A),
        ("consistent B", plain, Second, First, Ok(PairWinner::A), PairWinner::B),
        ("estimation skip", estimate, First, First, Ok(PairWinner::B), PairWinner::A),
        ("keyed override", plain, First, First, Ok(PairWinner::B), PairWinner::B),
        ("keyed keeps baseline", plain, First, First, Ok(PairWinner::A), PairWinner::A),
        ("keyed tie keeps baseline", plain, Second, Second, Ok(PairWinner::Tie), PairWinner::B),
        ("keyed failure keeps baseline", plain, First, First, Err(JudgeError::Backend("down".into())), PairWinner::A),
    ];
    cases
        .into_iter()
        .map(|(name, q, ab, ba, keyed, expected_final)| {
            let judge = ScriptedPair::new(ab, ba, keyed);
            let decision = run_apocjudge(&pair_item(q), &judge, &EstimationDetector::default()).unwrap();
            let (compare_calls, keyed_calls) = judge.calls();
            Scenario {
                name,
                decision,
                compare_calls,
                keyed_calls,
                expected_final,
            }
        })
        .collect()
}

/// Checks every scenario; returns a description of the first violation.
pub fn check_apoc_scenarios() -> Result<usize, String> {
    let scenarios = apoc_scenarios();
    let mut branches = BTreeSet::new();
    for s in &scenarios {
        let d = &s.decision;
        d.check_invariants().map_err(|e| format!("{}: {e}", s.name))?;
        if d.final_winner != s.expected_final {
            return Err(format!("{}: final {} expected {}", s.name, d.final_winner, s.expected_final));
        }
        let total = s.compare_calls + s.keyed_calls;
        if total > 3 || d.judge_calls != total {
            return Err(format!("{}: {} calls, trace says {}", s.name, total, d.judge_calls));
        }
        if d.estimation_skipped && s.keyed_calls != 0 {
            return Err(format!("{}: estimation skip issued a keyed call", s.name));
        }
        if d.order_consistent && s.keyed_calls != 0 {
            return Err(format!("{}: consistent orders issued a keyed call", s.name));
        }
        branches.insert(match (d.order_consistent, d.estimation_skipped, d.override_applied) {
            (true, _, _) => "consistent",
            (false, true, _) => "estimation",
            (false, false, true) => "override",
            (false, false, false) => "baseline",
        });
    }
    if branches.len() != 4 {
        return Err(format!("only covered branches {branches:?}"));
    }
    Ok(scenarios.len())
}

// ---------------------------------------------------------------------------
// Parser fuzzing

const VALID_LISTWISE: &str = r#"```json
{
  "candidates": [
    {"position": 1, "score": 82, "rationale": "Correct and specific.", "major_error": false, "hallucinated_specificity": false, "calibrated_uncertainty": false},
    {"position": 2, "score": 40.5, "rationale": "Wrong date.", "major_error": true, "hallucinated_specificity": true, "calibrated_uncertainty": false},
    {"position": 3, "score": 61, "rationale": "Hedged but right.", "major_error": false, "hallucinated_specificity": false, "calibrated_uncertainty": true}
  ],
  "ranking": [1, 3, 2]
}
```"#;

const VALID_PAIR: &str = "```json\n{\"winner\": 2, \"rationale\": \"B is right.\"}\n```";
const VALID_KEYED_ANSWER: &str = "```json\n{\"answer\": \"Barcelona\"}\n```";
const VALID_KEYED_VERDICT: &str = "```json\n{\"winner\": \"neither\"}\n```";

const SEEDS: [&str; 4] = [VALID_LISTWISE, VALID_PAIR, VALID_KEYED_ANSWER, VALID_KEYED_VERDICT];

const GARBAGE: &[&str] = &[
    "```", "```json", "{", "}", "[", "]", "\"", ":", ",", "null", "NaN", "-1", "1e999", "\\", "\u{0}", "é", "🦀",
    "\"position\": 0", "\"ranking\": [1,1,1]", "\"score\": 101", "\"score\": \"high\"", "true", "{}", "[]",
];

fn mutate(rng: &mut ChaCha8Rng, seed: &str) -> String {
    let chars: Vec<char> = seed.chars().collect();
    let len = chars.len();
    let at = |rng: &mut ChaCha8Rng| rng.random_range(0..=len);
    match rng.random_range(0..10) {
        0 => chars[..at(rng)].iter().collect(),
        1 => {
            let a = at(rng);
            let b = (a + rng.random_range(1..40)).min(len);
            chars[..a].iter().chain(&chars[b..]).collect()
        }
        2 => {
            let a = at(rng);
            let g = GARBAGE[rng.random_range(0..GARBAGE.len())];
            let mut s: String = chars[..a].iter().collect();
            s.push_str(g);
            s.extend(&chars[a..]);
            s
        }
        3 => {
            let mut c = chars.clone();
            for _ in 0..rng.random_range(1..6) {
                if len > 0 {
                    let i = rng.random_range(0..len);
                    c[i] = char::from_u32(rng.random_range(0x20..0x7f)).unwrap();
                }
            }
            c.into_iter().collect()
        }
        4 => format!("{seed}\n{seed}"),
        5 => seed.replace("```json", "").replace("```", "").replace('}', ""),
        6 => (0..rng.random_range(0..200))
            .map(|_| char::from_u32(rng.random_range(0..0x3000)).unwrap_or('?'))
            .collect(),
        7 => {
            let numbers = ["-5", "100.0001", "1e308", "0.0", "18446744073709551616", "\"7\"", "null", "[]"];
            let n = numbers[rng.random_range(0..numbers.len())];
            let digits: Vec<usize> = seed.char_indices().filter(|(_, c)| c.is_ascii_digit()).map(|(i, _)| i).collect();
            match digits.get(rng.random_range(0..digits.len().max(1))) {
                Some(&i) => format!("{}{}{}", &seed[..i], n, &seed[i + 1..]),
                None => n.to_string(),
            }
        }
        8 => {
            let keys = ["\"candidates\"", "\"ranking\"", "\"winner\"", "\"answer\"", "\"position\"", "\"score\""];
            let k = keys[rng.random_range(0..keys.len())];
            seed.replacen(k, "\"other\"", 1)
        }
        _ => {
            let depth = rng.random_range(1..64);
            format!("```json\n{}{}\n```", "[".repeat(depth), "]".repeat(rng.random_range(0..depth)))
        }
    }
}

/// Feeds every parser; returns (inputs tried, typed rejections).
pub fn fuzz_parsers(target_rejections: usize, seed: u64) -> Result<(usize, usize), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut tried, mut rejected) = (0usize, 0usize);
    while rejected < target_rejections {
        if tried > target_rejections * 5 {
            return Err(format!("fuzzer stalled: {rejected} rejections after {tried} inputs"));
        }
        let base = SEEDS[rng.random_range(0..SEEDS.len())];
        let input = mutate(&mut rng, base);
        tried += 1;
        let outcome = std::panic::catch_unwind(|| {
            [
                parse_listwise_response(&input, 3, 64).err(),
                parse_pair_response(&input).err(),
                parse_keyed_answer(&input).err(),
                parse_keyed_verdict(&input).err(),
            ]
        })
        .map_err(|_| format!("parser panicked on input {input:?}"))?;
        // The mutated input counts as rejected when the parser for its own
        // format refuses it with a typed error.
        let own = SEEDS.iter().position(|s| *s == base).unwrap();
        if let Some(err) = &outcome[own] {
            match err {
                JudgeError::Parse(_) | JudgeError::Validation(_) => rejected += 1,
                other => return Err(format!("unexpected error kind {other:?} for {input:?}")),
            }
        }
    }
    Ok((tried, rejected))
}

// ---------------------------------------------------------------------------
// Replay determinism

/// Removes the timestamp field from each JSONL line, leaving all other bytes.
pub fn strip_timestamps(text: &str) -> String {
    let re = regex::Regex::new(r#","recorded_at":"[^"]*""#).unwrap();
    re.replace_all(text, "").into_owned()
}

fn load_listwise_fixture() -> Vec<EvalItem> {
    pcfjudge::eval::load_listwise_dataset(&fixture("listwise_small.jsonl"), None).unwrap()
}

fn load_pair_fixture() -> Vec<PairItem> {
    pcfjudge::eval::load_pair_dataset(&fixture("pairs_small.jsonl"), None).unwrap()
}

fn mock_backend() -> Arc<MockBackend> {
    Arc::new(MockBackend {
        listwise: MockProfile {
            bias: 0.4,
            noise: 5.0,
            seed: 17,
            ..MockProfile::default()
        },
        pairwise: MockPairProfile {
            seed: 17,
            ..MockPairProfile::default()
        },
    })
}

/// One judging pass over both fixtures; returns the prediction file bytes
/// and the number of backend calls the pass needed.
fn judging_pass(cache_dir: &Path, out: &Path) -> Result<(String, usize), String> {
    let cache = ResponseCache::open(cache_dir).map_err(|e| e.to_string())?;
    let client = Arc::new(JudgeClient::new(mock_backend(), "mock-judge").with_cache(cache));
    let options = ExperimentOptions {
        parallelism: 4,
        timestamps: true,
    };
    let listwise = ListwiseGateway::new(client.clone());
    let mut records: Vec<PredictionRecord> =
        run_listwise(&load_listwise_fixture(), &listwise, 7, 20_260_419, 0.5, "pcf-k7", options)
            .map_err(|e| e.to_string())?;
    let pair = PairGateway::new(client.clone());
    records.extend(
        run_pairwise(&load_pair_fixture(), &pair, &EstimationDetector::default(), "apoc", options)
            .map_err(|e| e.to_string())?,
    );
    write_predictions(out, &records, false).map_err(|e| e.to_string())?;
    let text = std::fs::read_to_string(out).map_err(|e| e.to_string())?;
    Ok((text, client.backend_calls()))
}

/// Judges the fixtures three times over one cache directory. The second and
/// third passes must make no backend calls and produce the same bytes as
/// each other and as the warming pass, timestamps aside.
pub fn check_replay_determinism(workdir: &Path) -> Result<usize, String> {
    let cache = workdir.join("cache");
    let (warm, warm_calls) = judging_pass(&cache, &workdir.join("warm.jsonl"))?;
    let (first, first_calls) = judging_pass(&cache, &workdir.join("replay1.jsonl"))?;
    let (second, second_calls) = judging_pass(&cache, &workdir.join("replay2.jsonl"))?;
    if warm_calls == 0 {
        return Err("warming pass made no backend calls".into());
    }
    if first_calls != 0 || second_calls != 0 {
        return Err(format!("warm-cache passes hit the backend ({first_calls}, {second_calls} calls)"));
    }
    if !first.contains("\"recorded_at\"") {
        return Err("records carry no timestamp to exclude".into());
    }
    let (warm, first, second) = (strip_timestamps(&warm), strip_timestamps(&first), strip_timestamps(&second));
    if first != second {
        return Err("replays differ".into());
    }
    if warm != first {
        return Err("replay differs from the warming pass".into());
    }
    Ok(first.lines().count())
}
