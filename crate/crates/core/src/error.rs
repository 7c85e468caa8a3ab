use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not Hermitian (max drift {drift:.3e})")]
    NotHermitian { drift: f64 },

    #[error("operator is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("closed form not applicable: {0}")]
    RegimeViolation(String),

    #[error(
        "no convergence after {iterations} iterations (primal residual {primal:.3e}, dual residual {dual:.3e})"
    )]
    NonConvergence {
        iterations: usize,
        primal: f64,
        dual: f64,
    },

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
