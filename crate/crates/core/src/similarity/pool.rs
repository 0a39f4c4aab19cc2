use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{set_distance, EmbeddingProvider, EmbeddingVector};
use crate::error::{Error, Result};

/// Symmetric distances between every pair of pool samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolDistanceMatrix {
    pub n: usize,
    pub sample_ids: Vec<String>,
    pub dim: usize,
    pub provider: String,
    /// Row-major `n × n`.
    pub entries: Vec<f64>,
}

impl PoolDistanceMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Builds a matrix from explicit entries, checking shape and invariants.
    pub fn from_entries(sample_ids: Vec<String>, entries: Vec<f64>, dim: usize, provider: &str) -> Result<Self> {
        let n = sample_ids.len();
        if entries.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        let m = PoolDistanceMatrix {
            n,
            sample_ids,
            dim,
            provider: provider.to_string(),
            entries,
        };
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<()> {
        for i in 0..self.n {
            if self.get(i, i) != 0.0 {
                return Err(Error::InvalidArgument(format!("nonzero diagonal at {i}")));
            }
            for j in 0..self.n {
                let d = self.get(i, j);
                if !d.is_finite() || d < 0.0 || d != self.get(j, i) {
                    return Err(Error::InvalidArgument(format!("invalid entry at ({i}, {j})")));
                }
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io::write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let m: PoolDistanceMatrix = crate::io::read_json(path)?;
        if m.entries.len() != m.n * m.n || m.sample_ids.len() != m.n {
            return Err(Error::InvalidArgument(format!(
                "{}: inconsistent matrix shape",
                path.display()
            )));
        }
        m.check()?;
        Ok(m)
    }
}

/// Pool matrix plus the samples left out because they had no triples.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolDistances {
    pub matrix: PoolDistanceMatrix,
    pub excluded: Vec<String>,
}

/// Embeds each distinct string once.
pub struct EmbeddingMemo<'p, P: ?Sized> {
    provider: &'p P,
    cache: HashMap<String, EmbeddingVector>,
    enabled: bool,
    pub calls: usize,
}

impl<'p, P: EmbeddingProvider + ?Sized> EmbeddingMemo<'p, P> {
    pub fn new(provider: &'p P) -> Self {
        EmbeddingMemo {
            provider,
            cache: HashMap::new(),
            enabled: true,
            calls: 0,
        }
    }

    pub fn disabled(provider: &'p P) -> Self {
        EmbeddingMemo {
            enabled: false,
            ..Self::new(provider)
        }
    }

    pub fn embed(&mut self, text: &str) -> Result<EmbeddingVector> {
        if let Some(v) = self.cache.get(text) {
            return Ok(v.clone());
        }
        self.calls += 1;
        let v = self.provider.embed(text)?;
        if v.dim() != self.provider.dim() {
            return Err(Error::DimMismatch {
                left: v.dim(),
                right: self.provider.dim(),
            });
        }
        if self.enabled {
            self.cache.insert(text.to_string(), v.clone());
        }
        Ok(v)
    }
}

/// Pairwise set distances over pre-extracted, verbalized triples.
///
/// Samples with no triples are excluded and reported; the set distance is
/// undefined for them.
pub fn pool_distances<P: EmbeddingProvider + ?Sized>(
    preextracted: &[(String, Vec<String>)],
    provider: &P,
) -> Result<PoolDistances> {
    pool_distances_with(preextracted, &mut EmbeddingMemo::new(provider))
}

pub fn pool_distances_with<P: EmbeddingProvider + ?Sized>(
    preextracted: &[(String, Vec<String>)],
    memo: &mut EmbeddingMemo<'_, P>,
) -> Result<PoolDistances> {
    let mut ids = Vec::new();
    let mut sets: Vec<Vec<EmbeddingVector>> = Vec::new();
    let mut excluded = Vec::new();
    for (id, verbalized) in preextracted {
        if verbalized.is_empty() {
            excluded.push(id.clone());
            continue;
        }
        let set = verbalized.iter().map(|z| memo.embed(z)).collect::<Result<Vec<_>>>()?;
        ids.push(id.clone());
        sets.push(set);
    }
    let n = ids.len();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = set_distance(&sets[i], &sets[j])?;
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    Ok(PoolDistances {
        matrix: PoolDistanceMatrix {
            n,
            sample_ids: ids,
            dim: memo.provider.dim(),
            provider: memo.provider.name().to_string(),
            entries,
        },
        excluded,
    })
}
