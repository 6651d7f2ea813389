use thiserror::Error;

use crate::reconstruction::FixedPointReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("cutoff {cutoff} out of range 0..={n}")]
    CutoffOutOfRange { cutoff: usize, n: usize },
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("integration produced non-finite values at step {step}")]
    IntegrationFailure { step: usize },
    #[error("not observable at this truncation (lambda_min = {lambda_min:e}, lambda_max = {lambda_max:e})")]
    NotObservable { lambda_min: f64, lambda_max: f64 },
    #[error("time grid mismatch: {0}")]
    GridMismatch(String),
    #[error("state leaves the 4*R0 ball: norm {norm:e} > {radius:e} at node {node}")]
    BallViolation { norm: f64, radius: f64, node: usize },
    #[error("fixed-point iteration diverged after {} iterations", .0.iterations)]
    Diverged(Box<FixedPointReport>),
    #[error("fixed-point iteration hit max_iter = {}", .0.iterations)]
    MaxIterExceeded(Box<FixedPointReport>),
    #[error("quadrature under-resolved: dt*(l_j+l_k) = {0:.3} > 0.5")]
    UnderResolved(f64),
    #[error("shooting failed: {0}")]
    Shooting(String),
}

pub type Result<T> = std::result::Result<T, Error>;
