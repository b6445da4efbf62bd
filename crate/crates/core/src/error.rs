use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix has eigenvalue {eigenvalue:e} below the tolerance floor")]
    NegativeEigenvalue { eigenvalue: f64 },

    #[error("state is not normalized (norm² = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("density matrix trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid Kraus set: completeness residual {residual:e}")]
    IncompleteKraus { residual: f64 },

    #[error("invalid projector set: {0}")]
    InvalidProjectors(String),

    #[error("filter operator has singular value {singular_value} > 1")]
    FilterNotContractive { singular_value: f64 },

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("conditional state is mixed (purity {purity}); POVM element is not rank one")]
    MixedConditional { purity: f64 },

    #[error("capability exceeded: {0}")]
    Capability(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
