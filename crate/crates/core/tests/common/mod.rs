#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tripleforge::dataset::GoldStore;
use tripleforge::model::{GoldAnnotation, Sample, Span, Triple, TripleSet};
use tripleforge::retriever::PairwiseDistanceSet;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gold store where sample `id` carries one triple per listed relation.
pub fn gold_store(samples: &[(&str, &[&str])]) -> GoldStore {
    let mut store = GoldStore::new();
    for (id, relations) in samples {
        let sample = Sample::new(*id, "Alpha met Beta").unwrap();
        let mut set = TripleSet::new();
        for r in *relations {
            let t = Triple::new(r, "T", "Alpha", "T", "Beta")
                .unwrap()
                .with_spans(Some(Span::new(0, 5)), Some(Span::new(10, 14)));
            set.insert(t);
        }
        store.insert(id.to_string(), GoldAnnotation::new(&sample, set).unwrap());
    }
    store
}

/// Random N×M table with entries k/16, k in 0..=32. Dyadic values keep sums
/// exact, so float rounding cannot perturb orderings under dyadic scaling.
pub fn quantized_table(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..m).map(|_| rng.gen_range(0..=32) as f64 / 16.0).collect())
        .collect()
}

pub fn table(rows: &[Vec<f64>]) -> PairwiseDistanceSet {
    PairwiseDistanceSet::from_rows(rows).unwrap()
}

/// Literal reading of the greedy coverage loop, written without reference to
/// the library: row and column indices stand in for ids.
pub fn coverage_oracle(rows: &[Vec<f64>], budget: usize) -> Vec<usize> {
    let n = rows.len();
    let m = rows[0].len();
    let k = m.div_ceil(budget);
    let mut rows_left: Vec<usize> = (0..n).collect();
    let mut cols_left: Vec<usize> = (0..m).collect();
    let mut picked = Vec::new();
    while picked.len() < budget && !cols_left.is_empty() && !rows_left.is_empty() {
        let mut best_row = usize::MAX;
        let mut best_cost = f64::INFINITY;
        let mut best_cols = Vec::new();
        for &i in &rows_left {
            let mut cand = cols_left.clone();
            // insertion sort by (distance, column)
            for a in 1..cand.len() {
                let mut b = a;
                while b > 0 {
                    let (x, y) = (cand[b - 1], cand[b]);
                    let swap = rows[i][y] < rows[i][x] || (rows[i][y] == rows[i][x] && y < x);
                    if !swap {
                        break;
                    }
                    cand.swap(b - 1, b);
                    b -= 1;
                }
            }
            cand.truncate(k);
            let mut cost = 0.0;
            for &j in &cand {
                cost += rows[i][j];
            }
            if cost < best_cost || (cost == best_cost && i < best_row) {
                best_row = i;
                best_cost = cost;
                best_cols = cand;
            }
        }
        picked.push(best_row);
        rows_left.retain(|&r| r != best_row);
        cols_left.retain(|c| !best_cols.contains(c));
    }
    picked
}

/// Brute-force average Hausdorff distance over raw coordinate lists.
pub fn hausdorff_oracle(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let d = |x: &Vec<f64>, y: &Vec<f64>| -> f64 {
        let mut s = 0.0;
        for k in 0..x.len() {
            s += (x[k] - y[k]) * (x[k] - y[k]);
        }
        s.sqrt()
    };
    let mut ab = 0.0;
    for x in a {
        ab += b.iter().map(|y| d(x, y)).fold(f64::INFINITY, f64::min);
    }
    let mut ba = 0.0;
    for y in b {
        ba += a.iter().map(|x| d(x, y)).fold(f64::INFINITY, f64::min);
    }
    ab / a.len() as f64 + ba / b.len() as f64
}

pub fn ids(prefix: &str, idx: &[usize]) -> Vec<String> {
    idx.iter().map(|i| format!("{prefix}{}", i + 1)).collect()
}
