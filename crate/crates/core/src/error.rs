use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("scenario pairing mismatch: {left} vs {right} scenarios")]
    Pairing { left: usize, right: usize },

    #[error("sample length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("index {index} outside the admissible range {lo}..={hi}")]
    BoundaryIndex { index: usize, lo: usize, hi: usize },

    #[error("squared norm {0} is negative beyond round-off")]
    NegativeNorm(f64),

    #[error("non-finite value in {what} for particle {particle} at step {step}")]
    Simulation {
        what: &'static str,
        particle: usize,
        step: usize,
    },

    #[error("Gamma process became non-positive ({value}) on path {path} at step {step}; reduce the step size")]
    GammaNonPositive {
        value: f64,
        path: usize,
        step: usize,
    },

    #[error("regression basis is rank deficient at step {step} (condition number {condition:e})")]
    RankDeficient { step: usize, condition: f64 },

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error("inadmissible perturbation: {0}")]
    Inadmissible(String),

    #[error("missing adjoint value at step {0}")]
    MissingAdjoint(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
