use alloc::string::String;

/// Errors raised by the geometry, solver and verification layers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("domain error at node {node}: {message}")]
    Domain { node: usize, message: String },

    #[error("metric is not positive definite at node {node}")]
    NotPositiveDefinite { node: usize },

    #[error("metric is too ill-conditioned to invert at node {node} (condition estimate {condition:e})")]
    IllConditioned { node: usize, condition: f64 },

    #[error("Cholesky factorization failed at node {node}")]
    Cholesky { node: usize },

    #[error("unknown catalog metric `{0}`")]
    UnknownCatalog(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hypothesis violated: {message} (node {node}, value {value:e})")]
    Hypothesis {
        node: usize,
        value: f64,
        message: String,
    },

    #[error("conformal factor {value} at node {node} exceeds the overflow guard |u| <= 50")]
    Overflow { node: usize, value: f64 },

    #[error("no admissible candidate: every conformal factor violates the gradient cap")]
    EmptyAdmissibleSet,

    #[error("linear solve did not converge: relative residual {relative_residual:e} after {iterations} iterations")]
    LinearSolve {
        iterations: usize,
        relative_residual: f64,
    },

    #[error("cone breach / no descent: damping fell below {damping:e}, offending node {node}")]
    NoDescent { damping: f64, node: usize },

    #[error("state is outside the Gamma_2^+ cone at node {node}")]
    OutsideCone { node: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
