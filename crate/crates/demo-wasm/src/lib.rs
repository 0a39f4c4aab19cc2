//! Browser bindings for the interactive demo page in `www/`.

use serde_json::json;
use tripleforge::prompting::{parse_output, PromptFormat};
use tripleforge::retriever::PairwiseDistanceSet;
use tripleforge::selection::select_coverage;
use tripleforge::similarity::set_distance;
use wasm_bindgen::prelude::*;

fn points(flat: &[f64]) -> Vec<[f64; 2]> {
    flat.chunks_exact(2).map(|c| [c[0], c[1]]).collect()
}

/// Average Hausdorff distance between two point sets given as flat
/// `[x0, y0, x1, y1, ...]` arrays. NaN when either set is empty.
#[wasm_bindgen]
pub fn hausdorff(a: &[f64], b: &[f64]) -> f64 {
    set_distance(&points(a), &points(b)).unwrap_or(f64::NAN)
}

/// Coverage selection over 2-D points, Euclidean distance between each pool
/// point and each test point. Returns the selection as JSON.
#[wasm_bindgen]
pub fn coverage(pool: &[f64], test: &[f64], budget: usize) -> String {
    let pool = points(pool);
    let test = points(test);
    let rows: Vec<Vec<f64>> = pool
        .iter()
        .map(|p| {
            test.iter()
                .map(|t| ((p[0] - t[0]).powi(2) + (p[1] - t[1]).powi(2)).sqrt())
                .collect()
        })
        .collect();
    let result = PairwiseDistanceSet::from_rows(&rows).and_then(|p| {
        let sel = select_coverage(&p, budget)?;
        let index = |id: &str| p.pool_index(id);
        let chosen: Vec<usize> = sel.chosen.iter().filter_map(|id| index(id)).collect();
        let steps: Vec<_> = sel
            .coverage
            .unwrap_or_default()
            .iter()
            .map(|s| {
                json!({
                    "pool": index(&s.sample_id),
                    "covers": s.covered_test_ids.iter()
                        .filter_map(|t| p.test_ids.iter().position(|x| x == t))
                        .collect::<Vec<_>>(),
                    "cost": s.cost,
                })
            })
            .collect();
        Ok(json!({ "chosen": chosen, "steps": steps }))
    });
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

/// Parses tabular model output against `sentence`, returning triples,
/// recovered spans and per-row diagnostics as JSON.
#[wasm_bindgen]
pub fn parse_table(text: &str, sentence: &str) -> String {
    let parsed = parse_output(PromptFormat::TableIE, text, sentence);
    serde_json::to_string(&parsed).unwrap_or_else(|e| json!({ "error": e.to_string() }).to_string())
}
