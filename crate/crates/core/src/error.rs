use thiserror::Error;

use crate::cross::CaseTag;
use crate::io::ParseError;
use crate::solvers::SolverTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vector must have at least one coordinate")]
    EmptyVector,

    #[error("coordinate {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A direction passed to a rank-one operator was not normalized.
    /// Callers normalize explicitly; nothing is renormalized silently.
    #[error("direction is not a unit vector (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("block system is singular for lambda = {lambda}")]
    Singular { lambda: f64 },

    #[error("spherical radius must be positive and finite, got {0}")]
    InvalidRadius(f64),

    #[error("expected {expected} angles for dimension {dim}, got {got}")]
    AngleCount {
        dim: usize,
        expected: usize,
        got: usize,
    },

    #[error("angle theta_{index} = {value} is outside its range")]
    AngleOutOfRange { index: usize, value: f64 },

    #[error("multiplier quadratic is undefined for orthogonal input")]
    OrthogonalInput,

    #[error("input is not degenerate (classified as {0})")]
    NotDegenerate(CaseTag),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("iterate became non-finite at iteration {iteration}")]
    Diverged {
        iteration: usize,
        trace: Box<SolverTrace>,
    },

    #[error(transparent)]
    Parse(#[from] ParseError),
}
