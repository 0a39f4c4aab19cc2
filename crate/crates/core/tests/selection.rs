mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::Rng;

use common::{coverage_oracle, gold_store, ids, quantized_table, rng, table};
use tripleforge::model::Schema;
use tripleforge::oracle::AnnotationOracle;
use tripleforge::selection::{
    order_demonstrations, select_balance, select_coverage, select_random, select_top_k, topk_ranking,
};
use tripleforge::Error;

#[test]
fn coverage_hand_trace() {
    let rows = vec![vec![0.1, 0.2, 0.9, 0.9], vec![0.8, 0.8, 0.1, 0.2], vec![0.5; 4]];
    let r = select_coverage(&table(&rows), 2).unwrap();
    assert_eq!(r.chosen, vec!["x1", "x2"]);
    let steps = r.coverage.unwrap();
    assert_eq!(steps[0].covered_test_ids, vec!["t1", "t2"]);
    assert_eq!(steps[1].covered_test_ids, vec!["t3", "t4"]);
    assert_eq!(r.tie_breaks, 1);
}

#[test]
fn coverage_matches_brute_force() {
    let mut r = rng(21);
    for case in 0..1000 {
        let n = r.gen_range(1..=8);
        let m = r.gen_range(1..=8);
        let b = r.gen_range(1..=4);
        let rows = if case % 2 == 0 {
            quantized_table(&mut r, n, m)
        } else {
            (0..n)
                .map(|_| (0..m).map(|_| r.gen_range(0.0..3.0)).collect())
                .collect()
        };
        let got = select_coverage(&table(&rows), b).unwrap().chosen;
        assert_eq!(got, ids("x", &coverage_oracle(&rows, b)), "case {case}: {rows:?} B={b}");
    }
}

#[test]
fn coverage_partitions_the_test_set_when_it_runs_out() {
    let mut r = rng(4);
    for _ in 0..200 {
        let n = r.gen_range(4..=8);
        let m = r.gen_range(1..=4);
        let rows = quantized_table(&mut r, n, m);
        let res = select_coverage(&table(&rows), 4).unwrap();
        let steps = res.coverage.unwrap();
        let covered: Vec<String> = steps.iter().flat_map(|s| s.covered_test_ids.clone()).collect();
        let unique: BTreeSet<_> = covered.iter().collect();
        assert_eq!(unique.len(), covered.len(), "a column was discarded twice");
        assert_eq!(unique.len(), m);
        assert!(res.chosen.len() <= m);
    }
}

#[test]
fn coverage_identical_rows_pick_lowest_ids() {
    let rows = vec![vec![0.3, 0.1, 0.2]; 4];
    let r = select_coverage(&table(&rows), 3).unwrap();
    assert_eq!(r.chosen, vec!["x1", "x2", "x3"]);
}

#[test]
fn topk_hand_count() {
    // u = 2: t1 -> {x1, x2}, t2 -> {x1, x3}, t3 -> {x2, x1}
    let rows = vec![vec![0.1, 0.1, 0.2], vec![0.2, 0.9, 0.1], vec![0.9, 0.2, 0.9]];
    let r = select_top_k(&table(&rows), 2, 2).unwrap();
    assert_eq!(r.chosen, vec!["x1", "x2"]);
    let (ranked, _) = topk_ranking(&table(&rows), 2).unwrap();
    let freq: Vec<usize> = ranked.iter().map(|c| c.frequency).collect();
    assert_eq!(freq, vec![3, 2, 1]);
}

#[test]
fn topk_ties_and_saturation() {
    let flat = vec![vec![0.5; 3]; 4];
    assert_eq!(select_top_k(&table(&flat), 2, 2).unwrap().chosen, vec!["x1", "x2"]);

    // u >= N: every frequency equals M, so total distance decides
    let rows = vec![vec![0.9, 0.9], vec![0.1, 0.2], vec![0.5, 0.4]];
    let r = select_top_k(&table(&rows), 5, 3).unwrap();
    assert_eq!(r.chosen, vec!["x2", "x3", "x1"]);

    let over = select_top_k(&table(&rows), 5, 10).unwrap();
    assert!(over.budget_exceeds_pool);
    assert_eq!(over.chosen.len(), 3);
}

#[test]
fn random_is_seeded_and_bounded() {
    let pool: Vec<String> = (1..=10).map(|i| format!("x{i}")).collect();
    let a = select_random(&pool, 4, 3).unwrap();
    assert_eq!(a, select_random(&pool, 4, 3).unwrap());
    let all = select_random(&pool, 10, 3).unwrap();
    assert_eq!(
        all.chosen.iter().collect::<BTreeSet<_>>(),
        pool.iter().collect::<BTreeSet<_>>()
    );
    assert!(matches!(
        select_random(&pool, 11, 3),
        Err(Error::BudgetExceedsPool { .. })
    ));
}

fn schema(relations: &[&str]) -> Schema {
    Schema::new(vec!["T".into()], relations.iter().map(|r| r.to_string()).collect()).unwrap()
}

#[test]
fn balance_walks_past_the_budget_for_a_rare_relation() {
    // ranking x1 < x2 < ... by total distance; only x6 carries Kill
    let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![0.1 * (i + 1) as f64; 2]).collect();
    let store = gold_store(&[
        ("x1", &["Work_For"]),
        ("x2", &["Work_For"]),
        ("x3", &["Live_In"]),
        ("x4", &["Live_In"]),
        ("x5", &["Work_For", "Live_In"]),
        ("x6", &["Kill"]),
        ("x7", &["Live_In"]),
        ("x8", &["Work_For"]),
    ]);
    let mut oracle = AnnotationOracle::new(store);
    let r = select_balance(
        &table(&rows),
        &schema(&["Work_For", "Live_In", "Kill"]),
        8,
        3,
        &mut oracle,
    )
    .unwrap();
    assert_eq!(r.chosen, vec!["x1", "x3", "x6"]);
    assert_eq!(r.checked_count, 6);
    assert!(r.checked_count > r.budget);
    assert_eq!(oracle.annotated_count(), 3);
    assert_eq!(oracle.checked_count(), 6);
}

#[test]
fn balance_records_shortfall_and_refills() {
    // six samples, none with Kill
    let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![0.1 * (i + 1) as f64; 3]).collect();
    let store = gold_store(&[
        ("x1", &["Work_For"]),
        ("x2", &["Work_For"]),
        ("x3", &["Live_In"]),
        ("x4", &["Work_For"]),
        ("x5", &["Live_In"]),
        ("x6", &["Work_For"]),
    ]);
    let mut oracle = AnnotationOracle::new(store);
    let r = select_balance(
        &table(&rows),
        &schema(&["Work_For", "Live_In", "Kill"]),
        5,
        4,
        &mut oracle,
    )
    .unwrap();
    let audit = r.balance.clone().unwrap();
    assert_eq!(audit.quota, 1);
    assert_eq!(audit.shortfall.get("Kill"), Some(&1));
    assert_eq!(r.chosen, vec!["x1", "x3", "x2", "x4"]);
    assert_eq!(audit.refilled, vec!["x2", "x4"]);
    assert!(r.chosen.len() <= 4);
    assert_eq!(r.checked_count, 6);
    assert_eq!(oracle.annotated_count(), 4);
}

#[test]
fn balance_with_one_shot_quota_covers_every_relation() {
    let rows: Vec<Vec<f64>> = (0..7).map(|i| vec![0.1 * (i + 1) as f64; 2]).collect();
    let rel = ["A", "B", "C", "D", "E"];
    let store = gold_store(&[
        ("x1", &["A"]),
        ("x2", &["A", "B"]),
        ("x3", &["C"]),
        ("x4", &["C"]),
        ("x5", &["D"]),
        ("x6", &["E"]),
        ("x7", &["B"]),
    ]);
    let mut oracle = AnnotationOracle::new(store);
    let r = select_balance(&table(&rows), &schema(&rel), 5, 5, &mut oracle).unwrap();
    let audit = r.balance.unwrap();
    assert!(audit.tallies.values().all(|&c| c >= 1));
    assert_eq!(r.chosen.len(), 5);
}

#[test]
fn demonstrations_are_ordered_most_similar_last() {
    let rows = vec![vec![0.9, 0.9], vec![0.2, 0.2], vec![0.5, 0.5], vec![0.5, 0.5]];
    let p = table(&rows);
    let chosen: Vec<String> = ["x2", "x1"].iter().map(|s| s.to_string()).collect();
    let ordered: Vec<String> = order_demonstrations(&chosen, &p)
        .unwrap()
        .into_iter()
        .map(|s| s.id)
        .collect();
    assert_eq!(ordered, vec!["x1", "x2"]);

    let tied: Vec<String> = ["x4", "x3"].iter().map(|s| s.to_string()).collect();
    let ordered: Vec<String> = order_demonstrations(&tied, &p)
        .unwrap()
        .into_iter()
        .map(|s| s.id)
        .collect();
    assert_eq!(ordered, vec!["x3", "x4"]);

    assert_eq!(order_demonstrations(&["x3".to_string()], &p).unwrap().len(), 1);
    assert!(order_demonstrations(&["nope".to_string()], &p).is_err());
}

proptest! {
    #[test]
    fn strategies_respect_budget_and_uniqueness(
        n in 1usize..9, m in 1usize..9, b in 1usize..6, u in 1usize..6, seed in 0u64..1000
    ) {
        let mut r = rng(seed);
        let rows = quantized_table(&mut r, n, m);
        let p = table(&rows);
        for res in [select_top_k(&p, u, b).unwrap(), select_coverage(&p, b).unwrap()] {
            prop_assert!(res.chosen.len() <= b);
            prop_assert!(res.checked_count >= res.chosen.len());
            prop_assert_eq!(res.chosen.iter().collect::<BTreeSet<_>>().len(), res.chosen.len());
        }
        prop_assert_eq!(select_coverage(&p, b).unwrap(), select_coverage(&p, b).unwrap());
    }
}
