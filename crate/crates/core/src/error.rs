use std::path::PathBuf;

/// Errors surfaced by the library and the CLI.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid triple: {0}")]
    InvalidTriple(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("span mismatch in sample {sample_id}: {message}")]
    SpanMismatch { sample_id: String, message: String },

    #[error("no samples in {0}")]
    NoSamples(PathBuf),

    #[error("duplicate sample id {0}")]
    DuplicateId(String),

    #[error("unknown sample id {0}")]
    UnknownSample(String),

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("demonstration order violated at position {0}")]
    DemoOrder(usize),

    #[error("no outputs to summarize")]
    EmptyOutputs,

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("non-finite embedding value")]
    NonFinite,

    #[error("set distance undefined for empty triple set")]
    EmptyTripleSet,

    #[error("insufficient pool: need at least 3 samples, got {0}")]
    InsufficientPool(usize),

    #[error("training diverged at epoch {0}")]
    Divergence(usize),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("budget {budget} exceeds pool size {pool}")]
    BudgetExceedsPool { budget: usize, pool: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("provider error after {attempts} attempt(s): {message}")]
    Provider {
        attempts: usize,
        status: Option<u16>,
        message: String,
    },

    #[error("missing artifact {path}; run `tripleforge {command}` first")]
    MissingArtifact { path: PathBuf, command: &'static str },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
