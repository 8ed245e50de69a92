use thiserror::Error;

/// Errors raised across the fitting, counting and entropy pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty degree sequence")]
    Empty,

    #[error("degree {degree} at node {node} outside [{min}, {max}]")]
    DegreeOutOfRange {
        node: usize,
        degree: usize,
        min: usize,
        max: usize,
    },

    #[error("degree sequence is not graphical")]
    NotGraphical,

    #[error("fit did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("matrix is not positive definite: eigenvalue {eigenvalue:e} at index {index}")]
    NotPositiveDefinite { index: usize, eigenvalue: f64 },

    #[error("singular diagonal entry at row {0}")]
    SingularDiagonal(usize),

    #[error("Ipsen-Lee bound undefined: lambda_min(A) = {0} is not above -1")]
    BoundUndefined(f64),

    #[error("n = {n} too large for exact counting (ceiling {ceiling})")]
    TooLarge { n: usize, ceiling: usize },

    #[error("scale undefined at this size: alpha_n = {0}")]
    ScaleUndefined(f64),

    #[error("probability {0} outside (0, 1)")]
    InvalidProbability(f64),

    #[error("graph degrees do not match the model's degree sequence")]
    DegreeMismatch,

    #[error("graph has {got} nodes, expected {expected}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("constraint is not realisable: graph count is zero")]
    ZeroCount,

    #[error("model carries no target degree sequence")]
    NoTarget,

    #[error("{0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
