use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("duplicate post_id {post_id:?} (line {line})")]
    DuplicatePost { post_id: String, line: usize },

    #[error("post {post_id:?} has an empty source")]
    EmptySource { post_id: String },

    #[error("invalid {format} file: {reason}")]
    Format { format: &'static str, reason: String },

    #[error("truncated {format} file: {reason}")]
    Truncated { format: &'static str, reason: String },

    #[error("duplicate embedding id {0:?}")]
    DuplicateEmbedding(String),

    #[error("embedding {0:?} contains a non-finite component")]
    NonFinite(String),

    #[error("embedding {0:?} is a zero vector")]
    ZeroVector(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("{count} post(s) have no embedding (first: {first:?})")]
    MissingEmbeddings { count: usize, first: String },

    #[error("threshold {0} outside (0, 1]")]
    Threshold(f64),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("line {line}: unknown leaning {value:?}")]
    UnknownLeaning { line: usize, value: String },

    #[error("line {line}: conflicting leanings for {source_key}")]
    ConflictingSeed { line: usize, source_key: String },

    #[error("unknown campaign id {0:?}")]
    UnknownCampaign(String),

    #[error("infeasible synthetic config: {0}")]
    Infeasible(String),

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) trait IoContext<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T>;
}

impl<T> IoContext<T> for std::io::Result<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T> {
        self.map_err(|source| Error::Io {
            path: path.into(),
            source,
        })
    }
}
