use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("unknown branch label `{0}`")]
    UnknownBranch(String),

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("Newton iteration collapsed onto the zero solution (power {power:e})")]
    ConvergedToZero { power: f64 },

    #[error("Jacobian is numerically singular")]
    SingularJacobian,

    #[error("eigen-decomposition failed: {0}")]
    EigenFailure(String),

    #[error("no adjoint eigenvalue within {tol:e} of {lambda}")]
    AdjointMismatch { lambda: num_complex::Complex64, tol: f64 },

    #[error("eigenvector has no coherent PT phase (circular variance {variance:e})")]
    PhaseIncoherent { variance: f64 },

    #[error("adjoint eigenvector unavailable")]
    AdjointUnavailable,

    #[error("Hamiltonian Krein signature requested at gamma = {0}")]
    NotHamiltonian(f64),

    #[error("linear-limit signature requested on a nonzero state (power {0:e})")]
    NotLinearLimit(f64),

    #[error("adjoint sign continuation is ambiguous (distances {minus:e} and {plus:e})")]
    AmbiguousSign { minus: f64, plus: f64 },

    #[error("too few samples for the square-root fit: {0}")]
    TooFewSamples(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
