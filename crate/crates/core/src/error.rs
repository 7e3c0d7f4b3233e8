use thiserror::Error;

/// Errors produced by the estimators, the oracle and the input loaders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid term {term}: {reason}")]
    InvalidTerm { term: usize, reason: String },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: String,
    },

    #[error("dimension {dim} exceeds the dense limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("decomposition has zero total norm bound")]
    ZeroKappa,

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error(
        "sampled index {index} has zero amplitude in the sampling state but nonzero target entry"
    )]
    UndefinedRatio { index: usize },

    #[error("matrix is not normal (max |AA* - A*A| = {deviation:e})")]
    NotNormal { deviation: f64 },

    #[error("matrix is normal but not Hermitian (max |A - A*| = {deviation:e}); complex spectra are unsupported")]
    NotHermitian { deviation: f64 },

    #[error("no certified polynomial up to degree {cap} for tau={tau}, theta={theta}, xi={xi}")]
    DegreeOverflow {
        cap: usize,
        tau: f64,
        theta: f64,
        xi: f64,
    },

    #[error("polynomial degree {degree} exceeds the monomial-basis limit {limit}")]
    MonomialDegree { degree: usize, limit: usize },

    #[error(
        "predicted cost 10^{predicted_log10:.2} leaf operations exceeds the cap 10^{cap_log10:.2}"
    )]
    CostCapExceeded {
        predicted_log10: f64,
        cap_log10: f64,
    },

    #[error("{0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason: reason.into(),
        }
    }
}
