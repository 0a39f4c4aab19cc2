//! Stage orchestration. Each stage reads the previous stage's artifact from
//! the run directory, writes its own, and records hashes in the manifest.
//!
//! ```text
//! preextract → distances → train → select → run → eval / cost
//!                  (direct distance source: preextract → select → …)
//! ```

mod config;
mod manifest;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dataset::{load_dataset, Dataset, Split};
use crate::error::{Error, Result};
use crate::eval::{cost_report, micro_f1, CostReport, EvalReport};
use crate::io::{read_json, write_atomic, write_json};
use crate::llm::{DiskCache, Gateway, LlmRequest, MockProvider, RetryPolicy};
use crate::model::{Sample, TripleSet};
use crate::oracle::AnnotationOracle;
use crate::prompting::{parse_output, render_few_shot, render_zero_shot, Demonstration, Diagnostic, PromptFormat};
use crate::retriever::{
    compute_pairwise, load_checkpoint_for, make_training_pairs, save_checkpoint, train, EpochStats,
    PairwiseDistanceSet, RetrieverModel,
};
use crate::selection::{
    order_demonstrations, select_balance, select_coverage, select_random, select_top_k, SelectionResult, Strategy,
};
use crate::similarity::{
    pool_distances_with, set_distance, EmbeddingMemo, EmbeddingProvider, HashingEmbedder, PoolDistanceMatrix,
};

pub use config::{Config, DistanceSource, EmbedderKind, ProviderKind};
pub use manifest::{ArtifactRecord, RunManifest, StageRecord, MANIFEST_FILE};

pub const PREEXTRACT_FILE: &str = "preextract.json";
pub const PREEXTRACT_TEST_FILE: &str = "preextract_test.json";
pub const POOL_DISTANCES_FILE: &str = "pool_distances.json";
pub const CHECKPOINT_FILE: &str = "retriever.ckpt";
pub const TRAIN_HISTORY_FILE: &str = "train_history.json";
pub const PAIRWISE_FILE: &str = "pairwise.json";
pub const SELECTION_FILE: &str = "selection.json";
pub const PREDICTIONS_FILE: &str = "predictions.json";
pub const EVAL_JSON_FILE: &str = "eval_report.json";
pub const EVAL_TEXT_FILE: &str = "eval_report.txt";
pub const COST_JSON_FILE: &str = "cost_report.json";
pub const COST_TEXT_FILE: &str = "cost_report.txt";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreextractedSample {
    pub id: String,
    pub triples: TripleSet,
    pub skipped_rows: usize,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreextractArtifact {
    pub provider: String,
    pub model: String,
    pub samples: Vec<PreextractedSample>,
    /// Samples whose extraction produced no triples.
    pub excluded: Vec<String>,
    /// False when the stage aborted part-way.
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainArtifact {
    pub history: Vec<EpochStats>,
    pub best_epoch: usize,
    pub train_pairs: usize,
    pub validation_pairs: usize,
    pub held_out: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoRecord {
    pub id: String,
    pub text: String,
    pub similarity: f64,
    pub gold: TripleSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionArtifact {
    pub distance_source: DistanceSource,
    pub selection: SelectionResult,
    pub checked_count: usize,
    pub annotated_count: usize,
    pub annotated_ids: Vec<String>,
    /// Test samples left out of the distance table (direct mode, no triples).
    pub excluded_test_ids: Vec<String>,
    /// Ascending similarity; the last one sits next to the query.
    pub demonstrations: Vec<DemoRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub raw: String,
    pub triples: TripleSet,
    pub skipped_rows: usize,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionsArtifact {
    pub format: PromptFormat,
    pub demonstrations: usize,
    pub predictions: Vec<PredictionRecord>,
}

pub struct Pipeline {
    config: Config,
    gateway: Option<Gateway>,
    embedder: Option<Box<dyn EmbeddingProvider>>,
    pool: Option<Dataset>,
    test: Option<Dataset>,
}

fn artifact<T: DeserializeOwned>(run_dir: &Path, file: &str, command: &'static str) -> Result<T> {
    let path = run_dir.join(file);
    if !path.exists() {
        return Err(Error::MissingArtifact { path, command });
    }
    read_json(&path)
}

impl Pipeline {
    pub fn new(config: Config) -> Self {
        Pipeline {
            config,
            gateway: None,
            embedder: None,
            pool: None,
            test: None,
        }
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn run_dir(&self) -> &Path {
        &self.config.run_dir
    }

    /// Calls that reached the completion provider so far.
    pub fn provider_calls(&self) -> usize {
        self.gateway.as_ref().map_or(0, Gateway::provider_calls)
    }

    fn pool(&mut self) -> Result<&Dataset> {
        if self.pool.is_none() {
            self.pool = Some(load_dataset(&self.config.pool, Split::Train)?);
        }
        Ok(self.pool.as_ref().unwrap())
    }

    fn test(&mut self) -> Result<&Dataset> {
        if self.test.is_none() {
            self.test = Some(load_dataset(&self.config.test, Split::Test)?);
        }
        Ok(self.test.as_ref().unwrap())
    }

    fn gateway(&mut self) -> Result<&Gateway> {
        if self.gateway.is_none() {
            let provider: Box<dyn crate::llm::CompletionProvider> = match self.config.provider {
                ProviderKind::Mock => {
                    self.pool()?;
                    self.test()?;
                    let mock = MockProvider::echo_gold([self.pool.as_ref().unwrap(), self.test.as_ref().unwrap()])
                        .with_default_format(self.config.format);
                    Box::new(mock)
                }
                #[cfg(feature = "http")]
                ProviderKind::Real => Box::new(crate::llm::HttpChatProvider::from_env(self.config.endpoint.clone())?),
                #[cfg(not(feature = "http"))]
                ProviderKind::Real => return Err(Error::Config("built without the http feature".into())),
            };
            let gw = Gateway::new(provider)
                .with_cache(DiskCache::new(&self.config.cache_dir))
                .with_retry(RetryPolicy {
                    max_attempts: self.config.max_attempts,
                    base_delay_ms: self.config.backoff_ms,
                    max_delay_ms: self.config.max_backoff_ms,
                })
                .with_max_in_flight(self.config.max_in_flight);
            self.gateway = Some(gw);
        }
        Ok(self.gateway.as_ref().unwrap())
    }

    fn embedder(&mut self) -> Result<&dyn EmbeddingProvider> {
        if self.embedder.is_none() {
            let e: Box<dyn EmbeddingProvider> = match self.config.embedder {
                EmbedderKind::Hashing => Box::new(HashingEmbedder::new(self.config.embed_dim)),
                #[cfg(feature = "http")]
                EmbedderKind::Http => {
                    let key = std::env::var(crate::llm::API_KEY_ENV)
                        .map_err(|_| Error::Config(format!("{} is not set", crate::llm::API_KEY_ENV)))?;
                    Box::new(crate::similarity::HttpEmbedder::new(
                        self.config.embed_endpoint.clone(),
                        self.config.embed_model.clone(),
                        key,
                        self.config.embed_dim,
                    ))
                }
                #[cfg(not(feature = "http"))]
                EmbedderKind::Http => return Err(Error::Config("built without the http feature".into())),
            };
            self.embedder = Some(e);
        }
        Ok(self.embedder.as_deref().unwrap())
    }

    fn manifest(&self) -> Result<RunManifest> {
        let path = self.run_dir().join(MANIFEST_FILE);
        if path.exists() {
            let mut m = RunManifest::load(&path)?;
            m.config = self.config.clone();
            m.seed = self.config.seed;
            Ok(m)
        } else {
            let provider = match self.config.provider {
                ProviderKind::Mock => "mock",
                ProviderKind::Real => "http",
            };
            Ok(RunManifest::new(&self.config, provider))
        }
    }

    fn record(&mut self, stage: &str, files: &[&str], calls_before: usize) -> Result<()> {
        let calls = self.provider_calls() - calls_before;
        let mut m = self.manifest()?;
        m.record(self.run_dir(), stage, files, calls)?;
        m.save(self.run_dir())
    }

    /// Zero-shot TableIE extraction over `samples`. On provider failure the
    /// completed prefix is still returned, marked incomplete, alongside the error.
    fn zero_shot_extract(&mut self, samples: &[Sample]) -> Result<(PreextractArtifact, Option<Error>)> {
        let model = self.config.model.clone();
        let requests: Vec<LlmRequest> = samples
            .iter()
            .map(|s| LlmRequest::new(model.clone(), render_zero_shot(s)))
            .collect();
        let gw = self.gateway()?;
        let provider = gw.provider_name().to_string();
        let responses = gw.complete_all(&requests);
        let mut out = PreextractArtifact {
            provider,
            model,
            samples: Vec::new(),
            excluded: Vec::new(),
            complete: true,
        };
        let mut failure = None;
        for (s, r) in samples.iter().zip(responses) {
            match r {
                Ok(resp) => {
                    let parsed = parse_output(PromptFormat::TableIE, &resp.text, &s.text);
                    if parsed.triples.is_empty() {
                        out.excluded.push(s.id.clone());
                    }
                    out.samples.push(PreextractedSample {
                        id: s.id.clone(),
                        triples: parsed.triples,
                        skipped_rows: parsed.skipped_rows,
                        diagnostics: parsed.diagnostics,
                    });
                }
                Err(e) => {
                    out.complete = false;
                    failure.get_or_insert(e);
                }
            }
        }
        Ok((out, failure))
    }

    /// Stage 1: schema-agnostic pre-extraction over the pool.
    pub fn preextract(&mut self) -> Result<PreextractArtifact> {
        let calls = self.provider_calls();
        let samples = self.pool()?.samples.clone();
        let (artifact, failure) = self.zero_shot_extract(&samples)?;
        write_json(&self.run_dir().join(PREEXTRACT_FILE), &artifact)?;
        if let Some(e) = failure {
            return Err(e);
        }
        self.record("preextract", &[PREEXTRACT_FILE], calls)?;
        Ok(artifact)
    }

    /// Stage 2: pairwise set distances between pre-extracted pool samples.
    pub fn distances(&mut self) -> Result<PoolDistanceMatrix> {
        let pre: PreextractArtifact = artifact(self.run_dir(), PREEXTRACT_FILE, "preextract")?;
        let input: Vec<(String, Vec<String>)> = pre
            .samples
            .iter()
            .map(|s| (s.id.clone(), s.triples.verbalized()))
            .collect();
        let embedder = self.embedder()?;
        let result = pool_distances_with(&input, &mut EmbeddingMemo::new(embedder))?;
        result.matrix.save(&self.run_dir().join(POOL_DISTANCES_FILE))?;
        self.record("distances", &[POOL_DISTANCES_FILE], self.provider_calls())?;
        Ok(result.matrix)
    }

    /// Stage 3: fit the retriever projection to the pool distances.
    pub fn train(&mut self) -> Result<TrainArtifact> {
        let path = self.run_dir().join(POOL_DISTANCES_FILE);
        if !path.exists() {
            return Err(Error::MissingArtifact {
                path,
                command: "distances",
            });
        }
        let matrix = PoolDistanceMatrix::load(&path)?;
        let texts: BTreeMap<String, String> = self
            .pool()?
            .samples
            .iter()
            .map(|s| (s.id.clone(), s.text.clone()))
            .collect();
        let cfg = self.config.train.clone();
        let embedder = self.embedder()?;
        let inputs = matrix
            .sample_ids
            .iter()
            .map(|id| {
                let text = texts.get(id).ok_or_else(|| Error::UnknownSample(id.clone()))?;
                embedder.embed(text)
            })
            .collect::<Result<Vec<_>>>()?;
        let pairs = make_training_pairs(&matrix, cfg.validation_fraction, cfg.seed, cfg.max_pairs)?;
        let outcome = train(RetrieverModel::for_provider(embedder), &inputs, &pairs, &cfg)?;
        save_checkpoint(&outcome.model, &self.run_dir().join(CHECKPOINT_FILE))?;
        let art = TrainArtifact {
            history: outcome.history,
            best_epoch: outcome.best_epoch,
            train_pairs: pairs.train.len(),
            validation_pairs: pairs.validation.len(),
            held_out: pairs.held_out.iter().map(|&i| matrix.sample_ids[i].clone()).collect(),
        };
        write_json(&self.run_dir().join(TRAIN_HISTORY_FILE), &art)?;
        self.record("train", &[CHECKPOINT_FILE, TRAIN_HISTORY_FILE], self.provider_calls())?;
        Ok(art)
    }

    fn retriever_distances(&mut self, candidates: &[Sample]) -> Result<PairwiseDistanceSet> {
        let ckpt = self
            .config
            .checkpoint
            .clone()
            .unwrap_or_else(|| self.run_dir().join(CHECKPOINT_FILE));
        if !ckpt.exists() {
            return Err(Error::MissingArtifact {
                path: ckpt,
                command: "train",
            });
        }
        let test = self.test()?.samples.clone();
        let embedder = self.embedder()?;
        let model = load_checkpoint_for(&ckpt, embedder)?;
        compute_pairwise(&model, embedder, candidates, &test)
    }

    /// Zero-shot extraction of the test samples, then set distances straight
    /// into the pool × test table.
    fn direct_distances(&mut self, pre: &PreextractArtifact) -> Result<(PairwiseDistanceSet, Vec<String>)> {
        let test = self.test()?.samples.clone();
        let (test_pre, failure) = self.zero_shot_extract(&test)?;
        write_json(&self.run_dir().join(PREEXTRACT_TEST_FILE), &test_pre)?;
        if let Some(e) = failure {
            return Err(e);
        }
        let embedder = self.embedder()?;
        let mut memo = EmbeddingMemo::new(embedder);
        let embed_all = |memo: &mut EmbeddingMemo<'_, dyn EmbeddingProvider>, ts: &TripleSet| {
            ts.verbalized()
                .iter()
                .map(|z| memo.embed(z))
                .collect::<Result<Vec<_>>>()
        };
        let pool_rows: Vec<(&str, Vec<_>)> = pre
            .samples
            .iter()
            .filter(|s| !s.triples.is_empty())
            .map(|s| Ok((s.id.as_str(), embed_all(&mut memo, &s.triples)?)))
            .collect::<Result<_>>()?;
        let test_cols: Vec<(&str, Vec<_>)> = test_pre
            .samples
            .iter()
            .filter(|s| !s.triples.is_empty())
            .map(|s| Ok((s.id.as_str(), embed_all(&mut memo, &s.triples)?)))
            .collect::<Result<_>>()?;
        if test_cols.is_empty() {
            return Err(Error::InvalidArgument(
                "no test sample yielded triples for direct distances".into(),
            ));
        }
        let mut entries = Vec::with_capacity(pool_rows.len() * test_cols.len());
        for (_, zi) in &pool_rows {
            for (_, zj) in &test_cols {
                entries.push(set_distance(zi, zj)?);
            }
        }
        let p = PairwiseDistanceSet::new(
            pool_rows.iter().map(|(id, _)| id.to_string()).collect(),
            test_cols.iter().map(|(id, _)| id.to_string()).collect(),
            entries,
        )?;
        Ok((p, test_pre.excluded))
    }

    /// Stage 4: distance table, budgeted selection and annotation.
    pub fn select(&mut self) -> Result<SelectionArtifact> {
        let calls = self.provider_calls();
        let pre: PreextractArtifact = artifact(self.run_dir(), PREEXTRACT_FILE, "preextract")?;
        let pool = self.pool()?.clone();
        let candidates: Vec<Sample> = pre
            .samples
            .iter()
            .filter(|s| !s.triples.is_empty())
            .filter_map(|s| pool.sample(&s.id).cloned())
            .collect();
        if candidates.is_empty() {
            return Err(Error::InvalidArgument(
                "no pool sample has pre-extracted triples".into(),
            ));
        }
        let (p, excluded_test_ids) = match self.config.distance_source {
            DistanceSource::Retriever => (self.retriever_distances(&candidates)?, Vec::new()),
            DistanceSource::Direct => self.direct_distances(&pre)?,
        };
        p.save(&self.run_dir().join(PAIRWISE_FILE))?;

        let mut oracle = AnnotationOracle::new(pool.gold.clone());
        let budget = self.config.budget;
        let selection = match self.config.strategy {
            Strategy::TopK => select_top_k(&p, self.config.u, budget)?,
            Strategy::Coverage => select_coverage(&p, budget)?,
            Strategy::Random => select_random(&p.pool_ids, budget.min(p.n), self.config.seed)?,
            Strategy::Balance => {
                let schema = match &self.test()?.schema {
                    Some(s) => s.clone(),
                    None => pool
                        .schema
                        .clone()
                        .ok_or_else(|| Error::InvalidSchema("balance needs relation types".into()))?,
                };
                select_balance(&p, &schema, self.config.u, budget, &mut oracle)?
            }
        };
        let mut demonstrations = Vec::new();
        for scored in order_demonstrations(&selection.chosen, &p)? {
            let gold = oracle.annotate(&scored.id)?;
            let text = pool.sample(&scored.id).map(|s| s.text.clone()).unwrap_or_default();
            demonstrations.push(DemoRecord {
                id: scored.id,
                text,
                similarity: scored.similarity,
                gold: gold.triples,
            });
        }
        let art = SelectionArtifact {
            distance_source: self.config.distance_source,
            checked_count: oracle.checked_count(),
            annotated_count: oracle.annotated_count(),
            annotated_ids: oracle.annotated_ids().iter().cloned().collect(),
            selection,
            excluded_test_ids,
            demonstrations,
        };
        write_json(&self.run_dir().join(SELECTION_FILE), &art)?;
        let mut files = vec![PAIRWISE_FILE, SELECTION_FILE];
        if self.config.distance_source == DistanceSource::Direct {
            files.push(PREEXTRACT_TEST_FILE);
        }
        self.record("select", &files, calls)?;
        Ok(art)
    }

    /// Stage 5: one shared demonstration set, a few-shot prompt per test
    /// sample, parsed outputs.
    pub fn run(&mut self) -> Result<PredictionsArtifact> {
        let calls = self.provider_calls();
        let sel: SelectionArtifact = artifact(self.run_dir(), SELECTION_FILE, "select")?;
        let demos = sel
            .demonstrations
            .iter()
            .map(|d| {
                Ok(Demonstration {
                    sample: Sample::new(d.id.clone(), d.text.clone())?,
                    gold: d.gold.clone(),
                    similarity_score: d.similarity,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let format = self.config.format;
        let model = self.config.model.clone();
        let test = self.test()?.samples.clone();
        let requests = test
            .iter()
            .map(|t| Ok(LlmRequest::new(model.clone(), render_few_shot(format, &demos, t)?)))
            .collect::<Result<Vec<_>>>()?;
        let responses = self.gateway()?.complete_all(&requests);
        let mut predictions = Vec::with_capacity(test.len());
        for (t, r) in test.iter().zip(responses) {
            let raw = r?.text;
            let parsed = parse_output(format, &raw, &t.text);
            predictions.push(PredictionRecord {
                id: t.id.clone(),
                raw,
                triples: parsed.triples,
                skipped_rows: parsed.skipped_rows,
                diagnostics: parsed.diagnostics,
            });
        }
        let art = PredictionsArtifact {
            format,
            demonstrations: demos.len(),
            predictions,
        };
        write_json(&self.run_dir().join(PREDICTIONS_FILE), &art)?;
        self.record("run", &[PREDICTIONS_FILE], calls)?;
        Ok(art)
    }

    pub fn eval(&mut self) -> Result<EvalReport> {
        let preds: PredictionsArtifact = artifact(self.run_dir(), PREDICTIONS_FILE, "run")?;
        let gold: BTreeMap<String, TripleSet> = self
            .test()?
            .gold
            .iter()
            .map(|(id, g)| (id.clone(), g.triples.clone()))
            .collect();
        let by_id: BTreeMap<String, TripleSet> = preds
            .predictions
            .iter()
            .map(|p| (p.id.clone(), p.triples.clone()))
            .collect();
        let mut report = micro_f1(&by_id, &gold)?;
        report.skipped_rows = preds.predictions.iter().map(|p| p.skipped_rows).sum();
        write_atomic(
            &self.run_dir().join(EVAL_JSON_FILE),
            format!("{}\n", report.to_json()).as_bytes(),
        )?;
        write_atomic(&self.run_dir().join(EVAL_TEXT_FILE), report.to_table().as_bytes())?;
        self.record("eval", &[EVAL_JSON_FILE, EVAL_TEXT_FILE], self.provider_calls())?;
        Ok(report)
    }

    pub fn cost(&mut self) -> Result<CostReport> {
        let preds: PredictionsArtifact = artifact(self.run_dir(), PREDICTIONS_FILE, "run")?;
        let outputs: Vec<&str> = preds.predictions.iter().map(|p| p.raw.as_str()).collect();
        let report = cost_report(&outputs)?;
        let label = preds.format.to_string();
        write_atomic(
            &self.run_dir().join(COST_JSON_FILE),
            format!("{}\n", report.to_json()).as_bytes(),
        )?;
        write_atomic(
            &self.run_dir().join(COST_TEXT_FILE),
            CostReport::table(&[(&label, &report)]).as_bytes(),
        )?;
        self.record("cost", &[COST_JSON_FILE, COST_TEXT_FILE], self.provider_calls())?;
        Ok(report)
    }

    /// Every stage in order; the retriever stages are skipped in direct mode.
    pub fn run_all(&mut self) -> Result<EvalReport> {
        self.preextract()?;
        if self.config.distance_source == DistanceSource::Retriever && self.config.checkpoint.is_none() {
            self.distances()?;
            self.train()?;
        }
        self.select()?;
        self.run()?;
        let report = self.eval()?;
        self.cost()?;
        Ok(report)
    }

    /// Re-runs every stage from a manifest's configuration into `run_dir`,
    /// reusing the manifest's response cache.
    pub fn replay(manifest: &Path, run_dir: Option<PathBuf>) -> Result<Pipeline> {
        let m = RunManifest::load(manifest)?;
        let mut config = m.config;
        if let Some(dir) = run_dir {
            config.run_dir = dir;
        }
        let mut p = Pipeline::new(config);
        p.run_all()?;
        Ok(p)
    }
}
