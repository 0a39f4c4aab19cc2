//! Regression of projected-embedding distances onto set-distance targets.
//!
//! For a pair with base embeddings `e_i`, `e_j` and target `D`, the loss is
//! `(D − ‖W(e_i − e_j)‖)²`; the bias cancels in the difference. Batches sum
//! the per-pair losses; reported losses are per-pair means.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::RetrieverModel;
use crate::error::{Error, Result};
use crate::similarity::{EmbeddingVector, PoolDistanceMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub validation_fraction: f64,
    pub seed: u64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Cap on training pairs; `None` uses all of them.
    pub max_pairs: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 5,
            batch_size: 16,
            learning_rate: 2e-5,
            validation_fraction: 0.10,
            seed: 0,
            weight_decay: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            max_pairs: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::InvalidArgument("validation_fraction must be in (0, 1)".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch_size must be positive".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::InvalidArgument(
                "learning_rate must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingPair {
    pub i: usize,
    pub j: usize,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingPairs {
    pub train: Vec<TrainingPair>,
    pub validation: Vec<TrainingPair>,
    /// Pool indices whose pairs all went to validation.
    pub held_out: Vec<usize>,
}

/// All unordered pairs `i < j`, split by holding out whole samples.
pub fn make_training_pairs(
    matrix: &PoolDistanceMatrix,
    validation_fraction: f64,
    seed: u64,
    max_pairs: Option<usize>,
) -> Result<TrainingPairs> {
    let n = matrix.n;
    if n < 3 {
        return Err(Error::InsufficientPool(n));
    }
    if !(validation_fraction > 0.0 && validation_fraction < 1.0) {
        return Err(Error::InvalidArgument("validation_fraction must be in (0, 1)".into()));
    }
    let k = ((n as f64 * validation_fraction).round() as usize).clamp(1, n - 2);
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut held_out = order[..k].to_vec();
    held_out.sort_unstable();
    let mut is_held = vec![false; n];
    held_out.iter().for_each(|&i| is_held[i] = true);

    let mut train = Vec::new();
    let mut validation = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let pair = TrainingPair {
                i,
                j,
                target: matrix.get(i, j),
            };
            if is_held[i] || is_held[j] {
                validation.push(pair);
            } else {
                train.push(pair);
            }
        }
    }
    if let Some(cap) = max_pairs.filter(|&c| c < train.len()) {
        train.shuffle(&mut rng);
        train.truncate(cap);
        train.sort_by_key(|p| (p.i, p.j));
    }
    Ok(TrainingPairs {
        train,
        validation,
        held_out,
    })
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Summed squared residual over `pairs`.
pub fn batch_loss(model: &RetrieverModel, inputs: &[EmbeddingVector], pairs: &[TrainingPair]) -> f64 {
    pairs
        .iter()
        .map(|p| {
            let v = model.apply_linear(&diff(inputs[p.i].values(), inputs[p.j].values()));
            let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            (p.target - r).powi(2)
        })
        .sum()
}

/// Gradient of [`batch_loss`] with respect to the weights, row-major like
/// [`RetrieverModel::weights`]. Pairs whose projected difference is zero
/// contribute the zero subgradient.
pub fn batch_gradient(model: &RetrieverModel, inputs: &[EmbeddingVector], pairs: &[TrainingPair]) -> Vec<f64> {
    let cols = model.base_dim();
    let mut grad = vec![0.0; model.weights().len()];
    for p in pairs {
        let delta = diff(inputs[p.i].values(), inputs[p.j].values());
        let v = model.apply_linear(&delta);
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r == 0.0 {
            continue;
        }
        let coef = -2.0 * (p.target - r) / r;
        for (row, vr) in v.iter().enumerate() {
            let scale = coef * vr;
            for (c, d) in delta.iter().enumerate() {
                grad[row * cols + c] += scale * d;
            }
        }
    }
    grad
}

fn mean_loss(model: &RetrieverModel, inputs: &[EmbeddingVector], pairs: &[TrainingPair]) -> f64 {
    if pairs.is_empty() {
        0.0
    } else {
        batch_loss(model, inputs, pairs) / pairs.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub validation_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: RetrieverModel,
    /// Entry 0 is the initial model.
    pub history: Vec<EpochStats>,
    pub best_epoch: usize,
}

struct AdamW {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl AdamW {
    fn new(len: usize) -> Self {
        AdamW {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64], cfg: &TrainConfig) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            *p -= cfg.learning_rate * cfg.weight_decay * *p;
            self.m[k] = cfg.beta1 * self.m[k] + (1.0 - cfg.beta1) * g;
            self.v[k] = cfg.beta2 * self.v[k] + (1.0 - cfg.beta2) * g * g;
            let m_hat = self.m[k] / c1;
            let v_hat = self.v[k] / c2;
            *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
}

/// Mini-batch AdamW over the projection; returns the parameters from the
/// epoch with the lowest validation loss (the initial model included).
pub fn train(
    init: RetrieverModel,
    inputs: &[EmbeddingVector],
    pairs: &TrainingPairs,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if pairs.train.is_empty() {
        return Err(Error::InvalidArgument("no training pairs".into()));
    }
    if let Some(bad) = inputs.iter().find(|e| e.dim() != init.base_dim()) {
        return Err(Error::DimMismatch {
            left: bad.dim(),
            right: init.base_dim(),
        });
    }
    let mut model = init;
    let stats = |epoch: usize, model: &RetrieverModel| -> Result<EpochStats> {
        let s = EpochStats {
            epoch,
            train_loss: mean_loss(model, inputs, &pairs.train),
            validation_loss: mean_loss(model, inputs, &pairs.validation),
        };
        if s.train_loss.is_finite() && s.validation_loss.is_finite() {
            Ok(s)
        } else {
            Err(Error::Divergence(epoch))
        }
    };
    let mut history = vec![stats(0, &model)?];
    let mut best = (history[0].validation_loss, 0, model.clone());

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut w_opt = AdamW::new(model.weights().len());
    let mut b_opt = AdamW::new(model.bias().len());
    let zero_bias_grad = vec![0.0; model.bias().len()];
    let mut order = pairs.train.clone();
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let grad = batch_gradient(&model, inputs, batch);
            if grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Divergence(epoch));
            }
            w_opt.step(model.weights_mut(), &grad, config);
            b_opt.step(model.bias_mut(), &zero_bias_grad, config);
        }
        let s = stats(epoch, &model)?;
        if s.validation_loss < best.0 {
            best = (s.validation_loss, epoch, model.clone());
        }
        history.push(s);
    }
    Ok(TrainOutcome {
        model: best.2,
        history,
        best_epoch: best.1,
    })
}
