//! Plain-text `key = value` run configuration. `#` starts a comment; relative
//! paths resolve against the config file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prompting::PromptFormat;
use crate::retriever::TrainConfig;
use crate::selection::Strategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Mock,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceSource {
    /// Trained retriever over sentence embeddings.
    Retriever,
    /// Zero-shot extraction of the test samples, then set distances.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedderKind {
    Hashing,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub pool: PathBuf,
    pub test: PathBuf,
    pub run_dir: PathBuf,
    pub cache_dir: PathBuf,
    pub provider: ProviderKind,
    pub endpoint: String,
    pub model: String,
    pub max_attempts: usize,
    pub backoff_ms: u64,
    pub max_backoff_ms: u64,
    pub max_in_flight: usize,
    pub embedder: EmbedderKind,
    pub embed_dim: usize,
    pub embed_endpoint: String,
    pub embed_model: String,
    pub format: PromptFormat,
    pub strategy: Strategy,
    pub distance_source: DistanceSource,
    pub budget: usize,
    pub u: usize,
    pub seed: u64,
    pub train: TrainConfig,
    /// Pre-trained retriever to use instead of `run_dir/retriever.ckpt`.
    pub checkpoint: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            pool: PathBuf::from("train.jsonl"),
            test: PathBuf::from("test.jsonl"),
            run_dir: PathBuf::from("run"),
            cache_dir: PathBuf::from("run/cache"),
            provider: ProviderKind::Mock,
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-3.5-turbo".into(),
            max_attempts: 5,
            backoff_ms: 500,
            max_backoff_ms: 30_000,
            max_in_flight: 4,
            embedder: EmbedderKind::Hashing,
            embed_dim: 64,
            embed_endpoint: "https://api.openai.com/v1/embeddings".into(),
            embed_model: "text-embedding-3-small".into(),
            format: PromptFormat::TableIE,
            strategy: Strategy::Coverage,
            distance_source: DistanceSource::Retriever,
            budget: 5,
            u: 5,
            seed: 0,
            train: TrainConfig::default(),
            checkpoint: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = Config::default();
        cfg.pool = base.join(&cfg.pool);
        cfg.test = base.join(&cfg.test);
        cfg.run_dir = base.join(&cfg.run_dir);
        let mut cache_set = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", idx + 1)))?;
            let key = key.trim();
            let value = value.trim().trim_matches('"');
            if key == "cache_dir" {
                cache_set = true;
            }
            cfg.set(key, value, base)?;
        }
        if !cache_set {
            cfg.cache_dir = cfg.run_dir.join("cache");
        }
        Ok(cfg)
    }

    /// Applies one setting; CLI overrides go through here too.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<()> {
        let path = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        match key {
            "pool" => self.pool = path(value),
            "test" => self.test = path(value),
            "run_dir" => self.run_dir = path(value),
            "cache_dir" => self.cache_dir = path(value),
            "checkpoint" => self.checkpoint = Some(path(value)),
            "provider" => {
                self.provider = match value {
                    "mock" => ProviderKind::Mock,
                    "real" => ProviderKind::Real,
                    other => return Err(Error::Config(format!("provider: unknown {other:?}"))),
                }
            }
            "endpoint" => self.endpoint = value.to_string(),
            "model" => self.model = value.to_string(),
            "max_attempts" => self.max_attempts = parse_num(key, value)?,
            "backoff_ms" => self.backoff_ms = parse_num(key, value)?,
            "max_backoff_ms" => self.max_backoff_ms = parse_num(key, value)?,
            "max_in_flight" => self.max_in_flight = parse_num(key, value)?,
            "embedder" => {
                self.embedder = match value {
                    "hashing" => EmbedderKind::Hashing,
                    "http" => EmbedderKind::Http,
                    other => return Err(Error::Config(format!("embedder: unknown {other:?}"))),
                }
            }
            "embed_dim" => self.embed_dim = parse_num(key, value)?,
            "embed_endpoint" => self.embed_endpoint = value.to_string(),
            "embed_model" => self.embed_model = value.to_string(),
            "format" => self.format = value.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
            "strategy" => self.strategy = value.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
            "distance_source" => {
                self.distance_source = match value {
                    "retriever" => DistanceSource::Retriever,
                    "direct" => DistanceSource::Direct,
                    other => return Err(Error::Config(format!("distance_source: unknown {other:?}"))),
                }
            }
            "budget" => self.budget = parse_num(key, value)?,
            "u" => self.u = parse_num(key, value)?,
            "seed" => {
                self.seed = parse_num(key, value)?;
                self.train.seed = self.seed;
            }
            "epochs" => self.train.epochs = parse_num(key, value)?,
            "batch_size" => self.train.batch_size = parse_num(key, value)?,
            "learning_rate" => self.train.learning_rate = parse_num(key, value)?,
            "validation_fraction" => self.train.validation_fraction = parse_num(key, value)?,
            "weight_decay" => self.train.weight_decay = parse_num(key, value)?,
            "max_pairs" => self.train.max_pairs = Some(parse_num(key, value)?),
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_resolves_paths() {
        let cfg = Config::parse(
            "# demo\npool = data/train.jsonl\ntest=/abs/test.jsonl\nbudget = 4 # inline\nstrategy = coverage\nformat = codeie\nseed = 7\n",
            Path::new("/cfg"),
        )
        .unwrap();
        assert_eq!(cfg.pool, PathBuf::from("/cfg/data/train.jsonl"));
        assert_eq!(cfg.test, PathBuf::from("/abs/test.jsonl"));
        assert_eq!(cfg.budget, 4);
        assert_eq!(cfg.format, PromptFormat::CodeIE);
        assert_eq!((cfg.seed, cfg.train.seed), (7, 7));
        assert_eq!(cfg.cache_dir, PathBuf::from("/cfg/run/cache"));
    }

    #[test]
    fn defaults_follow_reported_settings() {
        let cfg = Config::default();
        assert_eq!((cfg.u, cfg.train.epochs, cfg.train.batch_size), (5, 5, 16));
        assert_eq!(cfg.train.learning_rate, 2e-5);
        assert_eq!(cfg.train.validation_fraction, 0.10);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(Config::parse("colour = blue", Path::new(".")).is_err());
        assert!(Config::parse("budget = many", Path::new(".")).is_err());
        assert!(Config::parse("no equals sign", Path::new(".")).is_err());
    }
}
