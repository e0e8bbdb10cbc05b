use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: probability {value} outside [0, 1]")]
    ProbabilityOutOfRange { line: usize, value: f64 },

    #[error("line {line}: duplicate edge {source_node} -> {target}")]
    DuplicateEdge {
        line: usize,
        source_node: usize,
        target: usize,
    },

    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: usize },

    #[error("empty graph")]
    EmptyGraph,

    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("expected {expected} per-edge values, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("edge {edge}: probability {value} outside [0, 1]")]
    InvalidProbability { edge: usize, value: f64 },

    #[error("edge {edge}: interval [{lower}, {upper}] is not inside [0, 1] or is reversed")]
    InvalidInterval { edge: usize, lower: f64, upper: f64 },

    #[error("duplicate seed node {0}")]
    DuplicateSeed(usize),

    #[error("seed set size {k} exceeds available nodes {n}")]
    BudgetTooLarge { k: usize, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("exact enumeration refused: {edges} relevant edges exceeds the limit of {limit}")]
    ExactEdgeGuard { edges: usize, limit: usize },

    #[error("exhaustive search refused: {count} candidate subsets exceeds the limit of {limit}")]
    SubsetGuard { count: u128, limit: u128 },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
