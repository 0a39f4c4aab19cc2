use crate::error::{Error, Result};
use crate::similarity::EmbeddingProvider;

/// Frozen base embedder followed by a trainable affine map:
/// `f(x) = W · base(x) + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrieverModel {
    base_name: String,
    base_dim: usize,
    out_dim: usize,
    /// Row-major `out_dim × base_dim`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl RetrieverModel {
    /// `W = I`, `b = 0`: distances equal raw base-embedding distances.
    pub fn identity(base_name: &str, base_dim: usize) -> Self {
        let mut weights = vec![0.0; base_dim * base_dim];
        for i in 0..base_dim {
            weights[i * base_dim + i] = 1.0;
        }
        RetrieverModel {
            base_name: base_name.to_string(),
            base_dim,
            out_dim: base_dim,
            weights,
            bias: vec![0.0; base_dim],
        }
    }

    pub fn for_provider<P: EmbeddingProvider + ?Sized>(provider: &P) -> Self {
        Self::identity(provider.name(), provider.dim())
    }

    pub fn from_parts(
        base_name: &str,
        base_dim: usize,
        out_dim: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self> {
        if weights.len() != out_dim * base_dim || bias.len() != out_dim {
            return Err(Error::DimMismatch {
                left: weights.len() + bias.len(),
                right: out_dim * base_dim + out_dim,
            });
        }
        if !weights.iter().chain(&bias).all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(RetrieverModel {
            base_name: base_name.to_string(),
            base_dim,
            out_dim,
            weights,
            bias,
        })
    }

    pub fn base_name(&self) -> &str {
        &self.base_name
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub(crate) fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    /// Multiplies every weight by `c`.
    pub fn scale_weights(&mut self, c: f64) {
        self.weights.iter_mut().for_each(|w| *w *= c);
    }

    /// Linear part only, `W · x`.
    pub(crate) fn apply_linear(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.base_dim)
            .map(|row| row.iter().zip(x).map(|(w, v)| w * v).sum())
            .collect()
    }

    pub fn project(&self, base: &[f64]) -> Result<Vec<f64>> {
        if base.len() != self.base_dim {
            return Err(Error::DimMismatch {
                left: base.len(),
                right: self.base_dim,
            });
        }
        let mut out = self.apply_linear(base);
        out.iter_mut().zip(&self.bias).for_each(|(o, b)| *o += b);
        Ok(out)
    }

    /// Errors unless `provider` is the base this model was built on.
    pub fn check_base<P: EmbeddingProvider + ?Sized>(&self, provider: &P) -> Result<()> {
        if provider.name() != self.base_name || provider.dim() != self.base_dim {
            return Err(Error::Checkpoint(format!(
                "model expects base {} (dim {}), got {} (dim {})",
                self.base_name,
                self.base_dim,
                provider.name(),
                provider.dim()
            )));
        }
        Ok(())
    }

    pub fn encode<P: EmbeddingProvider + ?Sized>(&self, provider: &P, text: &str) -> Result<Vec<f64>> {
        self.project(provider.embed(text)?.values())
    }
}
