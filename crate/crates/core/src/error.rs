use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("unknown letter in `{0}`")]
    UnknownLetter(String),
    #[error("word `{0}` is not reduced")]
    NotReduced(String),
    #[error("sphere of radius {radius} holds {size} words, above the cap of {cap}")]
    CapExceeded { radius: usize, size: u128, cap: u64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("degenerate system: spectral radius {0:e} is below tolerance")]
    DegenerateSystem(f64),
    #[error("normalization failed after {iterations} iterations (residual {residual:e})")]
    NormalizationFailed { iterations: usize, residual: f64 },
    #[error("forms are not compatible with the system (residual {0:e})")]
    NotCompatible(f64),
    #[error("form at letter `{0}` is not positive definite")]
    NotPositiveDefinite(String),
    #[error("decomposition did not converge: {0}")]
    DecompositionFailed(String),
    #[error("vectors belong to different systems")]
    SystemMismatch,
    #[error("invalid quotient: {0}")]
    InvalidQuotient(String),
    #[error("coset table is disconnected")]
    Disconnected,
    #[error("word `{0}` does not lie in the subgroup")]
    NotInSubgroup(String),
    #[error("induced layout inconsistency: {0}")]
    Layout(String),
    #[error("presentation depth too small: {0}")]
    DepthTooSmall(String),
    #[error("invalid virtually free datum: {0}")]
    InvalidDatum(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("exact arithmetic: {0}")]
    Exact(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Mathematical,
    Resource,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::CapExceeded { .. } => ErrorClass::Resource,
            Error::DegenerateSystem(_)
            | Error::NormalizationFailed { .. }
            | Error::NotCompatible(_)
            | Error::NotPositiveDefinite(_)
            | Error::DecompositionFailed(_)
            | Error::Layout(_)
            | Error::DepthTooSmall(_) => ErrorClass::Mathematical,
            _ => ErrorClass::Validation,
        }
    }
}
