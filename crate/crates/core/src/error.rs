use thiserror::Error;

/// Failures reported by the relabeling routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cycle detected in the order relation")]
    Cycle,
    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("label rank {rank} at vertex {vertex} outside 1..={labels}")]
    RankOutOfRange {
        vertex: usize,
        rank: usize,
        labels: usize,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid label scale: {0}")]
    InvalidScale(String),
    #[error("labels have no numeric values")]
    NotNumeric,
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("exponent p = {0} is not supported (need p >= 1)")]
    InvalidExponent(f64),
    #[error("kept set is not f-isotonic")]
    NotIsotonicSet,
    #[error("{0} requires a linear order")]
    RequiresLinear(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("index {to} is not a potential successor of {from}")]
    NotPotentialSuccessor { from: usize, to: usize },
    #[error("duplicate position {0}")]
    DuplicatePosition(usize),
    #[error("oracle budget exceeded: {0}")]
    OverBudget(String),
}

pub type Result<T> = std::result::Result<T, Error>;
