use std::collections::BTreeMap;

use proptest::prelude::*;

use tripleforge::eval::{cost_report, micro_f1, strict_match, CostReport};
use tripleforge::model::{Span, Triple, TripleSet};
use tripleforge::Error;

fn t(p: &str, s: (usize, usize), o: (usize, usize)) -> Triple {
    Triple::new(p, "Peop", "x", "Loc", "y")
        .unwrap()
        .with_spans(Some(Span::new(s.0, s.1)), Some(Span::new(o.0, o.1)))
}

fn set(ts: &[Triple]) -> TripleSet {
    ts.iter().cloned().collect()
}

fn one(id: &str, ts: TripleSet) -> BTreeMap<String, TripleSet> {
    BTreeMap::from([(id.to_string(), ts)])
}

#[test]
fn worked_example_is_one_half() {
    let a = t("Live_In", (0, 1), (5, 6));
    let b = t("Work_For", (0, 1), (8, 9));
    let c = t("Kill", (2, 3), (5, 6));
    let r = micro_f1(&one("s", set(&[a.clone(), c])), &one("s", set(&[a, b]))).unwrap();
    assert_eq!((r.totals.tp, r.totals.fp, r.totals.fn_), (1, 1, 1));
    assert_eq!((r.precision, r.recall, r.f1), (0.5, 0.5, 0.5));
}

#[test]
fn duplicate_correct_predictions_do_not_add_true_positives() {
    let a = t("Live_In", (0, 1), (5, 6));
    // same spans, different surface casing: two distinct predictions that
    // both strictly match the single gold triple
    let mut twin = a.clone();
    twin.subject = "X".into();
    let preds = set(&[a.clone(), twin]);
    assert_eq!(preds.len(), 2);
    let r = micro_f1(&one("s", preds), &one("s", set(&[a]))).unwrap();
    assert_eq!((r.totals.tp, r.totals.fp, r.totals.fn_), (1, 1, 0));
}

#[test]
fn strictness() {
    let g = t("Kill", (0, 5), (11, 18));
    assert!(strict_match(&g, &g));
    assert!(!strict_match(&g.clone().with_spans(None, g.object_span), &g));
    assert!(!strict_match(&t("Live_In", (0, 5), (11, 18)), &g));
    let mut typed = g.clone();
    typed.object_type = "Org".into();
    assert!(!strict_match(&typed, &g));
}

#[test]
fn unaligned_predictions_count_as_false_positives() {
    let g = t("Kill", (0, 5), (11, 18));
    let unaligned = g.clone().with_spans(None, None);
    let r = micro_f1(&one("s", set(&[unaligned])), &one("s", set(&[g]))).unwrap();
    assert_eq!(
        (r.totals.tp, r.totals.fp, r.totals.fn_, r.unaligned_entities),
        (0, 1, 1, 1)
    );
}

#[test]
fn empty_predictions_and_unknown_ids() {
    let g = one("s", set(&[t("Kill", (0, 1), (2, 3))]));
    let r = micro_f1(&BTreeMap::new(), &g).unwrap();
    assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
    let r = micro_f1(&g, &g).unwrap();
    assert_eq!(r.f1, 1.0);
    assert!(matches!(
        micro_f1(&one("other", TripleSet::new()), &g),
        Err(Error::UnknownSample(_))
    ));
}

#[test]
fn cost_fixtures() {
    let r = cost_report(&["a".repeat(30), "b".repeat(460)]).unwrap();
    assert_eq!((r.min_chars, r.max_chars, r.total_chars), (30, 460, 490));
    assert_eq!(cost_report(&["", ""]).unwrap().total_chars, 0);
    assert_eq!(
        cost_report(&["x".repeat(10), "x".repeat(20), "x".repeat(30)])
            .unwrap()
            .avg_chars,
        20.0
    );
    assert!(cost_report::<String>(&[]).is_err());
    let table = CostReport::table(&[("tableie", &r)]);
    for col in ["# Total", "# Avg.", "# Min.", "# Max."] {
        assert!(table.contains(col));
    }
}

fn arb_triple() -> impl Strategy<Value = Triple> {
    (0usize..3, 0usize..3, 0usize..3).prop_map(|(p, s, o)| t(["R0", "R1", "R2"][p], (s, s + 1), (o + 5, o + 6)))
}

fn arb_sets() -> impl Strategy<Value = Vec<(TripleSet, TripleSet)>> {
    prop::collection::vec(
        (
            prop::collection::vec(arb_triple(), 0..5),
            prop::collection::vec(arb_triple(), 0..5),
        )
            .prop_map(|(p, g)| (set(&p), set(&g))),
        1..6,
    )
}

/// Counts by set intersection; valid because both sides are duplicate-free.
fn oracle_counts(samples: &[(TripleSet, TripleSet)]) -> (usize, usize, usize) {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (p, g) in samples {
        let hits = p.iter().filter(|x| g.iter().any(|y| y == *x)).count();
        tp += hits;
        fp += p.len() - hits;
        fn_ += g.len() - hits;
    }
    (tp, fp, fn_)
}

proptest! {
    #[test]
    fn counts_match_set_oracle_and_ignore_order(samples in arb_sets()) {
        let preds: BTreeMap<String, TripleSet> =
            samples.iter().enumerate().map(|(i, (p, _))| (format!("s{i}"), p.clone())).collect();
        let gold: BTreeMap<String, TripleSet> =
            samples.iter().enumerate().map(|(i, (_, g))| (format!("s{i}"), g.clone())).collect();
        let r = micro_f1(&preds, &gold).unwrap();
        prop_assert_eq!((r.totals.tp, r.totals.fp, r.totals.fn_), oracle_counts(&samples));

        let reversed: BTreeMap<String, TripleSet> = preds
            .iter()
            .map(|(k, v)| (k.clone(), v.iter().rev().cloned().collect()))
            .collect();
        prop_assert_eq!(micro_f1(&reversed, &gold).unwrap().totals, r.totals);

        let p = r.precision;
        let rc = r.recall;
        let expected = if p + rc == 0.0 { 0.0 } else { 2.0 * p * rc / (p + rc) };
        prop_assert!((r.f1 - expected).abs() < 1e-12);
        prop_assert!(r.totals.tp <= r.totals.tp + r.totals.fp && r.totals.tp <= r.totals.tp + r.totals.fn_);
    }
}
