use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RetrieverModel;
use crate::error::{Error, Result};
use crate::model::Sample;
use crate::similarity::EmbeddingProvider;

/// Distances between every pool sample (rows) and every test sample
/// (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseDistanceSet {
    pub n: usize,
    pub m: usize,
    pub pool_ids: Vec<String>,
    pub test_ids: Vec<String>,
    /// Row-major `n × m`.
    pub entries: Vec<f64>,
}

impl PairwiseDistanceSet {
    pub fn new(pool_ids: Vec<String>, test_ids: Vec<String>, entries: Vec<f64>) -> Result<Self> {
        let (n, m) = (pool_ids.len(), test_ids.len());
        if entries.len() != n * m {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries, got {}",
                n * m,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|d| !d.is_finite() || **d < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "distance {bad} is not finite and non-negative"
            )));
        }
        Ok(PairwiseDistanceSet {
            n,
            m,
            pool_ids,
            test_ids,
            entries,
        })
    }

    /// Convenience constructor with generated ids `x1..` and `t1..`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        Self::new(
            (1..=rows.len()).map(|i| format!("x{i}")).collect(),
            (1..=m).map(|j| format!("t{j}")).collect(),
            rows.concat(),
        )
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.m..(i + 1) * self.m]
    }

    pub fn scaled(&self, c: f64) -> Self {
        PairwiseDistanceSet {
            entries: self.entries.iter().map(|d| d * c).collect(),
            ..self.clone()
        }
    }

    pub fn pool_index(&self, id: &str) -> Option<usize> {
        self.pool_ids.iter().position(|p| p == id)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io::write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw: PairwiseDistanceSet = crate::io::read_json(path)?;
        Self::new(raw.pool_ids, raw.test_ids, raw.entries)
    }
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Encodes every sample once through `model` and fills the pool × test
/// distance table.
pub fn compute_pairwise<P: EmbeddingProvider + ?Sized>(
    model: &RetrieverModel,
    provider: &P,
    pool: &[Sample],
    test: &[Sample],
) -> Result<PairwiseDistanceSet> {
    if pool.is_empty() || test.is_empty() {
        return Err(Error::InvalidArgument("pool and test sets must be non-empty".into()));
    }
    model.check_base(provider)?;
    let encode = |s: &Sample| model.encode(provider, &s.text);
    let pool_vecs = pool.iter().map(encode).collect::<Result<Vec<_>>>()?;
    let test_vecs = test.iter().map(encode).collect::<Result<Vec<_>>>()?;
    let entries = pool_vecs
        .iter()
        .flat_map(|x| test_vecs.iter().map(move |t| l2(x, t)))
        .collect();
    PairwiseDistanceSet::new(
        pool.iter().map(|s| s.id.clone()).collect(),
        test.iter().map(|s| s.id.clone()).collect(),
        entries,
    )
}
