mod common;

use rand::Rng;

use common::rng;
use tripleforge::model::Sample;
use tripleforge::retriever::{
    batch_gradient, batch_loss, compute_pairwise, decode_checkpoint, encode_checkpoint, load_checkpoint,
    load_checkpoint_for, make_training_pairs, save_checkpoint, train, RetrieverModel, TrainConfig, TrainingPair,
};
use tripleforge::similarity::{
    triple_distance, EmbeddingProvider, EmbeddingVector, HashingEmbedder, PoolDistanceMatrix,
};
use tripleforge::Error;

fn random_inputs(seed: u64, n: usize, dim: usize) -> Vec<EmbeddingVector> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| EmbeddingVector::new((0..dim).map(|_| r.gen_range(-1.0..1.0)).collect()).unwrap())
        .collect()
}

fn perturbed(seed: u64, dim: usize) -> RetrieverModel {
    let mut r = rng(seed);
    let weights = (0..dim * dim)
        .map(|k| if k % (dim + 1) == 0 { 1.0 } else { 0.0 } + r.gen_range(-0.3..0.3))
        .collect();
    RetrieverModel::from_parts("synthetic", dim, dim, weights, vec![0.0; dim]).unwrap()
}

fn with_weights(m: &RetrieverModel, w: Vec<f64>) -> RetrieverModel {
    RetrieverModel::from_parts(m.base_name(), m.base_dim(), m.out_dim(), w, m.bias().to_vec()).unwrap()
}

/// Distances generated by a hidden linear map over the inputs.
fn planted_matrix(inputs: &[EmbeddingVector], seed: u64) -> PoolDistanceMatrix {
    let dim = inputs[0].dim();
    let mut r = rng(seed);
    let a: Vec<f64> = (0..dim * dim).map(|_| r.gen_range(-1.5..1.5)).collect();
    let project = |x: &[f64]| -> Vec<f64> {
        (0..dim)
            .map(|row| (0..dim).map(|c| a[row * dim + c] * x[c]).sum())
            .collect()
    };
    let n = inputs.len();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let d: Vec<f64> = inputs[i]
                .values()
                .iter()
                .zip(inputs[j].values())
                .map(|(x, y)| x - y)
                .collect();
            entries[i * n + j] = project(&d).iter().map(|v| v * v).sum::<f64>().sqrt();
        }
    }
    let ids = (0..n).map(|i| format!("x{i}")).collect();
    PoolDistanceMatrix::from_entries(ids, entries, dim, "synthetic").unwrap()
}

#[test]
fn gradient_matches_central_differences() {
    let dim = 3;
    let inputs = random_inputs(1, 4, dim);
    let model = perturbed(2, dim);
    let pairs = [
        TrainingPair {
            i: 0,
            j: 1,
            target: 0.7,
        },
        TrainingPair {
            i: 2,
            j: 3,
            target: 1.9,
        },
    ];
    let grad = batch_gradient(&model, &inputs, &pairs);
    let h = 1e-6;
    for k in 0..grad.len() {
        let mut plus = model.weights().to_vec();
        let mut minus = plus.clone();
        plus[k] += h;
        minus[k] -= h;
        let numeric = (batch_loss(&with_weights(&model, plus), &inputs, &pairs)
            - batch_loss(&with_weights(&model, minus), &inputs, &pairs))
            / (2.0 * h);
        let rel = (numeric - grad[k]).abs() / numeric.abs().max(grad[k].abs()).max(1e-8);
        assert!(rel <= 1e-4, "weight {k}: analytic {} numeric {numeric}", grad[k]);
    }
}

#[test]
fn small_step_decreases_loss() {
    let dim = 4;
    let inputs = random_inputs(3, 6, dim);
    let model = perturbed(4, dim);
    let pairs: Vec<TrainingPair> = (0..5)
        .map(|i| TrainingPair {
            i,
            j: i + 1,
            target: 0.5 + i as f64 * 0.1,
        })
        .collect();
    let grad = batch_gradient(&model, &inputs, &pairs);
    assert!(grad.iter().any(|g| *g != 0.0));
    let stepped: Vec<f64> = model.weights().iter().zip(&grad).map(|(w, g)| w - 1e-6 * g).collect();
    assert!(batch_loss(&with_weights(&model, stepped), &inputs, &pairs) < batch_loss(&model, &inputs, &pairs));
}

#[test]
fn planted_affine_task_is_learned() {
    let inputs = random_inputs(5, 30, 4);
    let matrix = planted_matrix(&inputs, 6);
    let config = TrainConfig {
        epochs: 200,
        batch_size: 16,
        learning_rate: 0.01,
        weight_decay: 0.0,
        validation_fraction: 0.2,
        seed: 9,
        ..TrainConfig::default()
    };
    let pairs = make_training_pairs(&matrix, config.validation_fraction, config.seed, None).unwrap();
    let out = train(RetrieverModel::identity("synthetic", 4), &inputs, &pairs, &config).unwrap();
    let initial = out.history[0].validation_loss;
    let best = out.history[out.best_epoch].validation_loss;
    assert!(best <= 0.1 * initial, "initial {initial}, best {best}");
    assert_eq!(out.history.len(), 201);
}

#[test]
fn zero_epochs_return_the_initial_model() {
    let inputs = random_inputs(5, 10, 3);
    let matrix = planted_matrix(&inputs, 6);
    let pairs = make_training_pairs(&matrix, 0.2, 0, None).unwrap();
    let init = perturbed(1, 3);
    let config = TrainConfig {
        epochs: 0,
        ..TrainConfig::default()
    };
    let out = train(init.clone(), &inputs, &pairs, &config).unwrap();
    assert_eq!(out.model, init);
    assert_eq!(out.best_epoch, 0);
}

#[test]
fn training_is_seeded() {
    let inputs = random_inputs(8, 12, 3);
    let matrix = planted_matrix(&inputs, 2);
    let config = TrainConfig {
        epochs: 3,
        learning_rate: 1e-3,
        batch_size: 4,
        seed: 5,
        ..TrainConfig::default()
    };
    let pairs = make_training_pairs(&matrix, 0.2, config.seed, None).unwrap();
    let a = train(RetrieverModel::identity("synthetic", 3), &inputs, &pairs, &config).unwrap();
    let b = train(RetrieverModel::identity("synthetic", 3), &inputs, &pairs, &config).unwrap();
    assert_eq!(a.model, b.model);
    assert_eq!(a.history, b.history);
}

#[test]
fn divergence_names_the_epoch() {
    let inputs = random_inputs(8, 12, 3);
    let matrix = planted_matrix(&inputs, 2);
    let config = TrainConfig {
        epochs: 3,
        learning_rate: 1e300,
        weight_decay: 0.0,
        ..TrainConfig::default()
    };
    let pairs = make_training_pairs(&matrix, 0.2, 0, None).unwrap();
    let err = train(perturbed(1, 3), &inputs, &pairs, &config).unwrap_err();
    assert!(matches!(err, Error::Divergence(1)), "{err}");
    assert!(err.to_string().contains("diverged at epoch 1"));
}

#[test]
fn training_pairs_split_by_sample() {
    let inputs = random_inputs(1, 4, 2);
    let m4 = planted_matrix(&inputs, 1);
    let p = make_training_pairs(&m4, 0.1, 0, None).unwrap();
    assert_eq!(p.train.len() + p.validation.len(), 6);

    let inputs = random_inputs(2, 100, 2);
    let m100 = planted_matrix(&inputs, 1);
    let p = make_training_pairs(&m100, 0.10, 42, None).unwrap();
    assert_eq!(p.held_out.len(), 10);
    // pairs touching a held-out sample: 10*90 + C(10,2)
    assert_eq!(p.validation.len(), 10 * 90 + 45);
    assert_eq!(p.train.len(), 90 * 89 / 2);
    for pair in &p.train {
        assert!(!p.held_out.contains(&pair.i) && !p.held_out.contains(&pair.j));
        assert_eq!(pair.target, m100.get(pair.i, pair.j));
    }
    assert_eq!(make_training_pairs(&m100, 0.10, 42, None).unwrap(), p);

    let capped = make_training_pairs(&m100, 0.10, 42, Some(100)).unwrap();
    assert_eq!(capped.train.len(), 100);

    let inputs = random_inputs(3, 2, 2);
    let m2 = planted_matrix(&inputs, 1);
    let err = make_training_pairs(&m2, 0.1, 0, None).unwrap_err();
    assert!(err.to_string().contains("insufficient pool"));
}

fn samples(prefix: &str, texts: &[&str]) -> Vec<Sample> {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| Sample::new(format!("{prefix}{i}"), *t).unwrap())
        .collect()
}

#[test]
fn identity_model_reproduces_base_distances() {
    let e = HashingEmbedder::default();
    let pool = samples(
        "x",
        &[
            "Booth shot Lincoln.",
            "Acme is based in Denver.",
            "Maria works for Acme.",
        ],
    );
    let test = samples("t", &["Oswald shot Kennedy.", "Globex is in Springfield."]);
    let p = compute_pairwise(&RetrieverModel::for_provider(&e), &e, &pool, &test).unwrap();
    for (i, x) in pool.iter().enumerate() {
        for (j, t) in test.iter().enumerate() {
            let raw = triple_distance(&e.embed(&x.text).unwrap(), &e.embed(&t.text).unwrap()).unwrap();
            assert_eq!(p.get(i, j), raw);
        }
    }
}

#[test]
fn identical_text_is_at_distance_zero_and_symmetric() {
    let e = HashingEmbedder::default();
    let model = perturbed_for(&e);
    let pool = samples("x", &["Booth shot Lincoln.", "Acme is based in Denver."]);
    let test = samples("t", &["Acme is based in Denver.", "Booth shot Lincoln."]);
    let p = compute_pairwise(&model, &e, &pool, &test).unwrap();
    assert_eq!(p.get(1, 0), 0.0);
    assert_eq!(p.get(0, 1), 0.0);
    assert_eq!(p.get(0, 0), p.get(1, 1));
}

fn perturbed_for(e: &HashingEmbedder) -> RetrieverModel {
    let m = perturbed(11, e.dim());
    RetrieverModel::from_parts(e.name(), e.dim(), e.dim(), m.weights().to_vec(), m.bias().to_vec()).unwrap()
}

#[test]
fn hand_set_projection() {
    struct Fixed;
    impl EmbeddingProvider for Fixed {
        fn name(&self) -> &str {
            "fixed"
        }
        fn dim(&self) -> usize {
            2
        }
        fn embed(&self, text: &str) -> tripleforge::Result<EmbeddingVector> {
            let v = match text {
                "a" => vec![1.0, 0.0],
                "b" => vec![0.0, 1.0],
                "c" => vec![1.0, 1.0],
                _ => vec![0.0, 0.0],
            };
            EmbeddingVector::new(v)
        }
    }
    // W = [[2, 0], [0, 1]], b = [5, 5]
    let model = RetrieverModel::from_parts("fixed", 2, 2, vec![2.0, 0.0, 0.0, 1.0], vec![5.0, 5.0]).unwrap();
    let p = compute_pairwise(&model, &Fixed, &samples("x", &["a", "b"]), &samples("t", &["c", "z"])).unwrap();
    // projections: a=(7,5) b=(5,6) c=(7,6) z=(5,5)
    assert_eq!(p.entries, vec![1.0, 2.0, 2.0, 1.0]);

    let mut doubled = model.clone();
    doubled.scale_weights(2.0);
    let q = compute_pairwise(&doubled, &Fixed, &samples("x", &["a", "b"]), &samples("t", &["c", "z"])).unwrap();
    assert_eq!(q.entries, vec![2.0, 4.0, 4.0, 2.0]);
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let e = HashingEmbedder::default();
    let model = perturbed_for(&e);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.ckpt");
    save_checkpoint(&model, &path).unwrap();
    let loaded = load_checkpoint_for(&path, &e).unwrap();
    assert_eq!(loaded, model);

    let pool = samples("x", &["Booth shot Lincoln.", "Acme hired Maria."]);
    let test = samples("t", &["Oswald shot Kennedy."]);
    let a = compute_pairwise(&model, &e, &pool, &test).unwrap();
    let b = compute_pairwise(&loaded, &e, &pool, &test).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn checkpoint_rejects_mismatch_and_corruption() {
    let e = HashingEmbedder::default();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.ckpt");
    save_checkpoint(&perturbed_for(&e), &path).unwrap();
    assert!(matches!(
        load_checkpoint_for(&path, &HashingEmbedder::new(32)),
        Err(Error::Checkpoint(_))
    ));
    assert!(load_checkpoint(&path).is_ok());

    let bytes = encode_checkpoint(&perturbed_for(&e));
    let mut flipped = bytes.clone();
    flipped[40] ^= 1;
    assert!(decode_checkpoint(&flipped).is_err());
    assert!(decode_checkpoint(&bytes[..bytes.len() - 9]).is_err());
    let mut magic = bytes.clone();
    magic[0] = b'X';
    assert!(decode_checkpoint(&magic).unwrap_err().to_string().contains("bad magic"));
}

#[test]
fn checkpoint_applies_to_another_dataset() {
    let e = HashingEmbedder::default();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.ckpt");
    save_checkpoint(&perturbed_for(&e), &path).unwrap();
    let other = tripleforge::load_dataset(&common::fixture("starved_pool.jsonl"), tripleforge::Split::Train).unwrap();
    let test = tripleforge::load_dataset(&common::fixture("starved_test.jsonl"), tripleforge::Split::Test).unwrap();
    let model = load_checkpoint_for(&path, &e).unwrap();
    let p = compute_pairwise(&model, &e, &other.samples, &test.samples).unwrap();
    assert_eq!((p.n, p.m), (other.samples.len(), test.samples.len()));
}
