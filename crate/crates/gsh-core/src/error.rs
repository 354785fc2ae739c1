//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("direction matrix has zero radius")]
    ZeroRadius,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("function evaluation produced a non-finite value at {point:?}")]
    Evaluation { point: Vec<f64> },
    #[error("point set is not poised for quadratic interpolation (rank {rank} of {size})")]
    NotPoised { rank: usize, size: usize },
    #[error("expected {expected} points, found {found}")]
    Cardinality { expected: usize, found: usize },
    #[error(
        "no error bound applies: S is not full column rank, some T_i is not \
         full row rank, and the T_i are not all equal"
    )]
    BoundNotApplicable,
    #[error("index {index} out of range 0..={max}")]
    IndexRange { index: usize, max: usize },
    #[error("order fit needs at least {needed} rows above the round-off floor, found {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("failed to parse matrix: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
