use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid construction: {0}")]
    Construction(String),

    #[error("undefined arithmetic: {0}")]
    Undefined(&'static str),

    #[error("no closed-form conjugate available for {0}")]
    NoConjugate(&'static str),

    #[error("operation unsupported: {0}")]
    Unsupported(String),

    #[error("conjugate unreliable at {at:?}: maximizer sits on the sampling box boundary")]
    ConjugateUnreliable { at: Vec<f64> },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no finite-gap increment found at step {step}; recent step gaps {trace:?}")]
    NonConvergence { step: usize, trace: Vec<f64> },

    #[error("step {step}: no admissible increment (extremality gap {gap:e} exceeds tolerance {tol:e})")]
    Inadmissible { step: usize, gap: f64, tol: f64 },

    #[error("path is not admissible: {0}")]
    InadmissiblePath(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Attaches a step index to step-level failures.
    pub fn at_step(self, k: usize) -> Self {
        match self {
            Error::NonConvergence { trace, .. } => Error::NonConvergence { step: k, trace },
            Error::Inadmissible { gap, tol, .. } => Error::Inadmissible { step: k, gap, tol },
            e => e,
        }
    }
}
