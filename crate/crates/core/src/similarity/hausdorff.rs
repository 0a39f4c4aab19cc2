use crate::error::{Error, Result};

use super::EmbeddingVector;

impl AsRef<[f64]> for EmbeddingVector {
    fn as_ref(&self) -> &[f64] {
        self.values()
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Euclidean distance between two triple embeddings.
pub fn triple_distance<V: AsRef<[f64]>>(a: &V, b: &V) -> Result<f64> {
    let (a, b) = (a.as_ref(), b.as_ref());
    if a.len() != b.len() {
        return Err(Error::DimMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(euclidean(a, b))
}

fn directed_mean<V: AsRef<[f64]>>(from: &[V], to: &[V]) -> f64 {
    let sum: f64 = from
        .iter()
        .map(|x| {
            to.iter()
                .map(|y| euclidean(x.as_ref(), y.as_ref()))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    sum / from.len() as f64
}

/// Average Pompeiu–Hausdorff distance: the mean nearest-neighbour distance
/// from `a` into `b` plus the mean from `b` into `a`.
///
/// Unlike the classic max-min Hausdorff distance this is not a metric (the
/// triangle inequality can fail), but it is symmetric and zero on equal sets.
pub fn set_distance<V: AsRef<[f64]>>(a: &[V], b: &[V]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyTripleSet);
    }
    let dim = a[0].as_ref().len();
    if let Some(bad) = a.iter().chain(b).map(|v| v.as_ref().len()).find(|&d| d != dim) {
        return Err(Error::DimMismatch { left: dim, right: bad });
    }
    Ok(directed_mean(a, b) + directed_mean(b, a))
}
