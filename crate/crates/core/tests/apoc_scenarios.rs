mod common;

use common::*;
use pcfjudge::pairwise::{run_apocjudge, EstimationDetector, PairWinner, Presented};
use pcfjudge::JudgeError;
use proptest::prelude::*;

#[test]
fn all_branches_respect_the_gate() {
    assert_eq!(check_apoc_scenarios().unwrap(), 7);
}

#[test]
fn scenario_traces() {
    let by_name = |name: &str| apoc_scenarios().into_iter().find(|s| s.name == name).unwrap();

    let s = by_name("consistent A");
    assert!(s.decision.order_consistent);
    assert_eq!((s.compare_calls, s.keyed_calls, s.decision.judge_calls), (2, 0, 2));
    assert_eq!(s.decision.keyed_winner, None);

    let s = by_name("estimation skip");
    assert!(s.decision.estimation_skipped && !s.decision.override_applied);
    assert_eq!(s.keyed_calls, 0);

    let s = by_name("keyed override");
    assert!(s.decision.override_applied);
    assert_eq!((s.decision.baseline_winner, s.decision.swapped_winner), (PairWinner::A, PairWinner::B));
    assert_eq!(s.decision.judge_calls, 3);
    assert_eq!(s.decision.winners(), vec![1]);

    let s = by_name("keyed keeps baseline");
    assert!(!s.decision.override_applied);
    assert_eq!(s.decision.keyed_winner, Some(PairWinner::A));

    let s = by_name("keyed tie keeps baseline");
    assert_eq!(s.decision.keyed_winner, Some(PairWinner::Tie));
    assert_eq!(s.decision.final_winner, PairWinner::B);

    let s = by_name("keyed failure keeps baseline");
    assert_eq!(s.decision.keyed_winner, None);
    assert!(s.decision.keyed_error.as_deref().unwrap().contains("down"));
    assert_eq!(s.keyed_calls, 1);
}

#[test]
fn ordered_failure_is_an_error() {
    struct Broken;
    impl pcfjudge::pairwise::PairJudge for Broken {
        fn compare(&self, _: &pcfjudge::PairItem, _: pcfjudge::pairwise::PairOrder) -> Result<Presented, JudgeError> {
            Err(JudgeError::Backend("offline".into()))
        }
        fn keyed(&self, _: &pcfjudge::PairItem) -> Result<pcfjudge::pairwise::KeyedVerdict, JudgeError> {
            unreachable!()
        }
    }
    let err = run_apocjudge(&pair_item("q"), &Broken, &EstimationDetector::default()).unwrap_err();
    assert!(err.to_string().contains("offline"), "{err}");
}

fn presented() -> impl Strategy<Value = Presented> {
    prop_oneof![Just(Presented::First), Just(Presented::Second)]
}

fn keyed() -> impl Strategy<Value = PairWinner> {
    prop_oneof![Just(PairWinner::A), Just(PairWinner::B), Just(PairWinner::Tie)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(PROPERTY_CASES))]

    /// Relabelling A and B exchanges the two ordered verdicts and never
    /// breaks the gate.
    #[test]
    fn swapping_labels_exchanges_the_orders(ab in presented(), ba in presented(), k in keyed(), estimate in any::<bool>()) {
        let item = pair_item(if estimate { "Estimate the length of the Nile." } else { "Who wrote Dubliners?" });
        let detector = EstimationDetector::default();
        let judge = ScriptedPair::new(ab, ba, Ok(k));
        let d = run_apocjudge(&item, &judge, &detector).unwrap();
        let mirror = ScriptedPair::new(ba, ab, Ok(k.flipped()));
        let m = run_apocjudge(&item.swapped(), &mirror, &detector).unwrap();
        prop_assert!(d.check_invariants().is_ok());
        prop_assert!(m.check_invariants().is_ok());
        prop_assert_eq!(m.baseline_winner, d.swapped_winner.flipped());
        prop_assert_eq!(m.swapped_winner, d.baseline_winner.flipped());
        prop_assert_eq!(m.order_consistent, d.order_consistent);
        prop_assert!(d.judge_calls <= 3 && m.judge_calls <= 3);
        if d.order_consistent {
            prop_assert_eq!(m.final_winner, d.final_winner.flipped());
        }
    }
}
