use thiserror::Error;

/// Failures reported by the model, solver and verifiers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidSpec(String),

    #[error("regularization parameter must be positive, got {0}")]
    InvalidR(f64),

    #[error("nonlocal denominator {integral} fell below half of sigma*|Omega| = {threshold}")]
    DenominatorTooSmall { integral: f64, threshold: f64 },

    #[error("{what} did not converge after {iterations} iterations (last change {last_change:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        last_change: f64,
    },

    #[error("time step from t = {time} failed after {halvings} halvings (residual {residual:e})")]
    StepFailure {
        time: f64,
        halvings: usize,
        residual: f64,
    },

    #[error("brute-force oracle stalled at residual {residual:e}")]
    OracleFailure { residual: f64 },

    #[error("differential inequality violated at sample {index}: lhs {lhs} > rhs {rhs}")]
    HypothesisViolated { index: usize, lhs: f64, rhs: f64 },

    #[error("exponent m = {0} is outside the admissible range (need m > 2)")]
    InvalidExponent(f64),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("empty snapshot set")]
    EmptySet,

    #[error("fields live on different grids")]
    GridMismatch,
}

pub type Result<T> = std::result::Result<T, Error>;
