use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty graph")]
    EmptyGraph,

    #[error("missing file {0}")]
    MissingFile(PathBuf),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: malformed row: {reason}")]
    Malformed {
        file: String,
        line: usize,
        reason: String,
    },

    #[error("{what} index {index} out of range (bound {bound})")]
    OutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("masks `{first}` and `{second}` overlap at node {node}")]
    MaskOverlap {
        first: &'static str,
        second: &'static str,
        node: usize,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("empty train mask")]
    EmptyTrainMask,

    #[error("{have} test nodes cannot fill {bins} bins")]
    TooFewNodes { have: usize, bins: usize },

    #[error("class {class}: train and minority prototypes coincide (zero denominator)")]
    DegenerateDenominator { class: usize },

    #[error("edge budget saturated: placed {placed} of {budget} edges before {limit} consecutive rejections")]
    Saturated {
        placed: usize,
        budget: usize,
        limit: usize,
    },

    #[error("non-finite training loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("infinite separability threshold: {0}")]
    InfiniteThreshold(String),

    #[error("minority set is empty; no test nodes for the structural split")]
    EmptyMinority,

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of numerical procedures rather than of inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteLoss { .. } | Error::Saturated { .. } | Error::InfiniteThreshold(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
