use thiserror::Error;

use crate::bowl::BowlSolution;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("singular correction system (N = {dim}, m = {degree}); the map q -> H(wq) must be invertible")]
    SingularSystem { dim: usize, degree: u32 },

    #[error("correction residual H(wq) + Hp is not identically zero")]
    ResidualNotZero,

    #[error("the heat kernel is not defined at its pole")]
    PoleEvaluation,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge: error estimate {estimate:.3e} exceeds tolerance {tolerance:.3e}")]
    QuadratureNotConverged { estimate: f64, tolerance: f64 },

    #[error("field evaluation failed at {point}: {message}")]
    Evaluation { point: String, message: String },

    #[error("boundary fit tolerance {tolerance:.3e} not met up to degree {max_degree}; best certificate {best_epsilon:.3e}")]
    ToleranceNotMet {
        tolerance: f64,
        max_degree: u32,
        best_epsilon: f64,
        best: Box<BowlSolution>,
    },

    #[error("interpolation stencil incomplete; exterior nodes {nodes:?}")]
    IncompleteStencil { nodes: Vec<Vec<usize>> },

    #[error("no interior bowls fit the domain at this resolution (opening {opening})")]
    NoInteriorBowls { opening: f64 },

    #[error("invalid sweep configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
