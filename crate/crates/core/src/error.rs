use std::io;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum KwError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    SpecMismatch(String),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("field file format error: {0}")]
    Format(String),

    #[error("size mismatch: expected {expected} values, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier '{name}' at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },

    #[error("evaluation error at byte {offset}: {message}")]
    Eval { offset: usize, message: String },

    #[error("degenerate parameter: n*t - t + 1 = {k_t:e}")]
    DegenerateParameter { k_t: f64 },

    #[error("Lee form is not Gauduchon: divergence sup-norm {divergence:e} exceeds {tolerance:e}")]
    NonGauduchon { divergence: f64, tolerance: f64 },

    #[error("solvability violated: mean of right-hand side is {mean:e}")]
    SolvabilityViolated { mean: f64 },

    #[error("linear solve did not converge after {iterations} iterations (residual {residual:e})")]
    LinearNotConverged { iterations: usize, residual: f64 },

    #[error("singular operator: {0}")]
    SingularOperator(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("prescribed curvature vanishes at index {index}")]
    VanishingCurvature { index: usize },

    #[error("non-positive ratio s/s_hat = {ratio:e} at index {index}")]
    NonPositiveRatio { index: usize, ratio: f64 },

    #[error("necessary condition violated: mean(phi) = {mean:e} is not negative")]
    NecessaryConditionViolated { mean: f64 },

    #[error("cannot certify a super-solution: {0}")]
    CannotCertify(String),

    #[error("line search stalled at Newton iteration {iteration} (residual {residual:e})")]
    LineSearchStall { iteration: usize, residual: f64 },

    #[error("iteration diverged at step {iteration} (step size {step:e})")]
    Diverged { iteration: usize, step: f64 },

    #[error("continuation failed at tau = {tau} (residual {residual:e})")]
    ContinuationFailed { tau: f64, residual: f64 },

    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

impl KwError {
    /// Byte offset into the source expression, for parser and evaluator errors.
    pub fn offset(&self) -> Option<usize> {
        match self {
            KwError::Syntax { offset, .. }
            | KwError::UnknownIdentifier { offset, .. }
            | KwError::Eval { offset, .. } => Some(*offset),
            _ => None,
        }
    }
}

pub type Result<T, E = KwError> = std::result::Result<T, E>;
