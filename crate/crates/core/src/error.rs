//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("json error on {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("unknown node id {0:?}")]
    UnknownNode(String),

    #[error("unknown node type {0:?}")]
    UnknownNodeType(String),

    #[error("unknown edge type {0:?}")]
    UnknownEdgeType(String),

    #[error("duplicate node id {0:?}")]
    DuplicateNode(String),

    #[error("unknown term {0:?}")]
    UnknownTerm(String),

    #[error("term id {term} out of range for vocabulary of {len} terms")]
    TermOutOfRange { term: u32, len: usize },

    #[error("invalid context spec {0:?}: {1}")]
    ContextSpec(String, String),

    #[error("context {0:?} has no contextual units")]
    EmptyContext(String),

    #[error("k-means error: {0}")]
    Kmeans(String),

    #[error("embedding for node {0:?} is missing")]
    MissingEmbedding(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("checkpoint format version {found} unsupported (expected {expected})")]
    CheckpointVersion { expected: u32, found: u32 },

    #[error("feature layout mismatch: model expects [{expected}], inputs provide [{actual}]")]
    LayoutMismatch { expected: String, actual: String },

    #[error("pair ({0:?}, {1:?}) has no label")]
    UnlabeledPair(String, String),

    #[error("labeled pair ({0:?}, {1:?}) is missing from the ranked list")]
    MissingRankedPair(String, String),

    #[error("duplicate labeled pair ({0:?}, {1:?})")]
    DuplicateLabel(String, String),

    #[error("k={k} exceeds ranked list length {len}")]
    KTooLarge { k: usize, len: usize },

    #[error("invalid fold split: {0}")]
    FoldSplit(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("artifact {path} does not match the manifest hash; refusing to reuse it (delete it or rerun with --force)")]
    CorruptedArtifact { path: PathBuf },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
