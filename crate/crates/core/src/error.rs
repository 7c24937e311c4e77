use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("denominator {value:e} is below the singularity guard")]
    SingularDenominator { value: f64 },
    #[error("non-finite value produced")]
    NonFinite,
    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("Newton matrix is singular (determinant {det:e})")]
    SingularJacobian { det: f64 },
    #[error("parameters outside the domain: {0}")]
    Domain(String),
    #[error("continuation corrector failed at minimum step {step:e}")]
    StepFailure { step: f64 },
    #[error("matrix is not a saddle: {0}")]
    NotSaddle(String),
    #[error("no crossing-count change found in the scanned interval")]
    NoEvent,
    #[error("orbit inventory does not change across the bracket")]
    Inconclusive,
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
