use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed-length vector of finite reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().all(|v| v.is_finite()) {
            Ok(EmbeddingVector(values))
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for EmbeddingVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        EmbeddingVector::new(v)
    }
}

impl From<EmbeddingVector> for Vec<f64> {
    fn from(v: EmbeddingVector) -> Self {
        v.0
    }
}

/// Maps text to vectors. Implementations must be deterministic: equal text,
/// equal vector.
pub trait EmbeddingProvider: Send + Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn embed(&self, text: &str) -> Result<EmbeddingVector>;
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for &P {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn embed(&self, text: &str) -> Result<EmbeddingVector> {
        (**self).embed(text)
    }
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for Box<P> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn embed(&self, text: &str) -> Result<EmbeddingVector> {
        (**self).embed(text)
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(parts: &[&str]) -> u64 {
    let mut h = FNV_OFFSET;
    for (i, part) in parts.iter().enumerate() {
        if i > 0 {
            h ^= 0x1f;
            h = h.wrapping_mul(FNV_PRIME);
        }
        for b in part.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    h
}

/// Offline embedder: hashes lowercase word unigrams, word bigrams and
/// character trigrams into a signed bag of features, then L2-normalizes.
#[derive(Debug, Clone)]
pub struct HashingEmbedder {
    dim: usize,
    name: String,
}

impl HashingEmbedder {
    pub const DEFAULT_DIM: usize = 64;

    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dim must be positive");
        HashingEmbedder {
            dim,
            name: format!("hashing-{dim}"),
        }
    }

    fn add(&self, acc: &mut [f64], parts: &[&str], weight: f64) {
        let h = fnv1a(parts);
        let idx = (h % self.dim as u64) as usize;
        let sign = if (h >> 63) & 1 == 1 { -1.0 } else { 1.0 };
        acc[idx] += sign * weight;
    }
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        HashingEmbedder::new(Self::DEFAULT_DIM)
    }
}

impl EmbeddingProvider for HashingEmbedder {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector> {
        let mut acc = vec![0.0; self.dim];
        let words: Vec<String> = text
            .split_whitespace()
            .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        for w in &words {
            self.add(&mut acc, &["w", w], 1.0);
            let padded: Vec<char> = format!("#{w}#").chars().collect();
            for tri in padded.windows(3) {
                let tri: String = tri.iter().collect();
                self.add(&mut acc, &["c", &tri], 0.5);
            }
        }
        for pair in words.windows(2) {
            self.add(&mut acc, &["b", &pair[0], &pair[1]], 1.0);
        }
        let norm = acc.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            acc.iter_mut().for_each(|v| *v /= norm);
        }
        EmbeddingVector::new(acc)
    }
}

/// Embeddings from an OpenAI-compatible `/embeddings` endpoint
/// (`{"model", "input"}` → `data[0].embedding`).
#[cfg(feature = "http")]
pub struct HttpEmbedder {
    endpoint: String,
    model: String,
    api_key: String,
    dim: usize,
    name: String,
    agent: ureq::Agent,
}

#[cfg(feature = "http")]
impl HttpEmbedder {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>, api_key: impl Into<String>, dim: usize) -> Self {
        let model = model.into();
        HttpEmbedder {
            endpoint: endpoint.into(),
            name: format!("http:{model}"),
            model,
            api_key: api_key.into(),
            dim,
            agent: ureq::AgentBuilder::new()
                .timeout(std::time::Duration::from_secs(60))
                .build(),
        }
    }
}

#[cfg(feature = "http")]
impl EmbeddingProvider for HttpEmbedder {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector> {
        let provider_err = |status: Option<u16>, message: String| Error::Provider {
            attempts: 1,
            status,
            message,
        };
        let resp = self
            .agent
            .post(&self.endpoint)
            .set("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(serde_json::json!({"model": self.model, "input": text}))
            .map_err(|e| match e {
                ureq::Error::Status(code, r) => provider_err(Some(code), r.into_string().unwrap_or_default()),
                other => provider_err(None, other.to_string()),
            })?;
        let body: serde_json::Value = resp.into_json().map_err(|e| provider_err(None, e.to_string()))?;
        let values: Vec<f64> = body["data"][0]["embedding"]
            .as_array()
            .ok_or_else(|| provider_err(None, "response lacks data[0].embedding".into()))?
            .iter()
            .map(|v| v.as_f64().ok_or(Error::NonFinite))
            .collect::<Result<_>>()?;
        if values.len() != self.dim {
            return Err(Error::DimMismatch {
                left: values.len(),
                right: self.dim,
            });
        }
        EmbeddingVector::new(values)
    }
}
