use thiserror::Error;

use crate::graph::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(ValidationReport),

    #[error("vertices {0:?} are not regular (need 0 < |s^-1(v)| < inf)")]
    NotRegular(Vec<String>),

    #[error("unknown vertex or ray {0:?}")]
    UnknownVertex(String),

    #[error("operation requires a graph without tail rays")]
    HasTails,

    #[error("tail depth must be at least 1")]
    ZeroDepth,

    #[error("vertex set is not hereditary and saturated: {0}")]
    NotHereditarySaturated(String),

    #[error("ideal is not X-invariant and X-saturated: {0}")]
    NotInvariantSaturated(String),

    #[error("not a subgraph: {0}")]
    NotSubgraph(String),

    #[error("graph has a directed cycle through {0:?}; no finite-dimensional path representation")]
    Cyclic(String),

    #[error("edge {0:?} has infinite multiplicity; no finite-dimensional representation")]
    InfiniteEmitter(String),

    #[error("budget exceeded: {what} is {actual}, limit {limit}")]
    Budget {
        what: &'static str,
        limit: usize,
        actual: usize,
    },

    #[error("matrix size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("target is not a homomorphism: {0}")]
    NotHomomorphism(String),

    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
