use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("half-dimension m = {0} is too small (need m >= 2)")]
    DimensionTooSmall(usize),
    #[error("matrix {name} has shape {rows}x{cols}, expected {dim}x{dim}")]
    MatrixShape {
        name: &'static str,
        rows: usize,
        cols: usize,
        dim: usize,
    },
    #[error("J does not square to -I (max residual {0:e})")]
    NotComplexStructure(f64),
    #[error("metric is not symmetric (max residual {0:e})")]
    MetricNotSymmetric(f64),
    #[error("metric is not positive definite (smallest eigenvalue {0:e})")]
    MetricNotPositive(f64),
    #[error("metric is not J-compatible: g(JX,JY) != g(X,Y) (max residual {0:e})")]
    MetricNotCompatible(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("vector {index} is linearly dependent on the preceding ones")]
    RankDeficient { index: usize },
    #[error("plane basis is not orthonormal (Gram residual {0:e})")]
    NotOrthonormal(f64),
    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,
    #[error("angle {0} outside [0, pi/2]")]
    AngleOutOfRange(f64),
    #[error("tensor violates {property} (max residual {residual:e})")]
    NotCurvature {
        property: &'static str,
        residual: f64,
    },
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("too few constraint rows: {got} < {min}")]
    TooFewRows { got: usize, min: usize },
    #[error("{0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
