use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("iteration did not converge: {0}")]
    Convergence(String),
    #[error("invalid support bounds: {0}")]
    InvalidBounds(String),
    #[error("no analytic near-one tail model for {0}")]
    UnsupportedDistribution(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("degenerate case: {0}")]
    DegenerateCase(String),
    #[error("invalid distribution spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
