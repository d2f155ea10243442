use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("exponent must be at least 1")]
    ZeroExponent,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not invertible modulo {p}")]
    NotInvertible { p: u64 },
    #[error("order search exceeded the iteration cap of {cap}")]
    IterationCapExceeded { cap: u64 },
    #[error("order growth did not stabilise by exponent {limit}")]
    NoStableGrowth { limit: u32 },
    #[error("polynomial is not irreducible modulo {p}")]
    NotIrreducible { p: u64 },
    #[error("polynomial has a repeated factor modulo {p}")]
    NonSquarefree { p: u64 },
    #[error("polynomial has a repeated root over the rationals")]
    NotSquarefreeOverQ,
    #[error("polynomial has zero constant term")]
    ZeroConstantTerm,
    #[error("polynomial vanishes modulo {p}")]
    ZeroPolynomial { p: u64 },
    #[error("valuation not resolved below precision cap {cap}")]
    PrecisionCapExceeded { cap: u32 },
    #[error("working precision must be at least 1")]
    InsufficientPrecision,
    #[error("exact division failed: {0}")]
    ExactDivisionFailure(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("generator has no projection vector v")]
    MissingProjection,
    #[error("period {period} exceeds the enumeration limit {limit}")]
    PeriodTooLarge { period: u64, limit: u64 },
    #[error("grid of {size} points exceeds the limit {limit}")]
    GridTooLarge { size: u128, limit: u128 },
    #[error("enumeration of {size} tuples exceeds the limit {limit}")]
    EnumerationTooLarge { size: u128, limit: u128 },
    #[error("dimension {0} is not supported here")]
    DimensionTooLarge(usize),
    #[error("{count} points exceed the limit {limit}")]
    TooManyPoints { count: usize, limit: usize },
    #[error("denominator too large for exact evaluation")]
    DenominatorTooLarge,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for errors caused by a size or iteration guard rather than bad input.
    pub fn is_resource_guard(&self) -> bool {
        matches!(
            self,
            Error::IterationCapExceeded { .. }
                | Error::NoStableGrowth { .. }
                | Error::PrecisionCapExceeded { .. }
                | Error::PeriodTooLarge { .. }
                | Error::GridTooLarge { .. }
                | Error::EnumerationTooLarge { .. }
                | Error::DimensionTooLarge(_)
                | Error::TooManyPoints { .. }
                | Error::DenominatorTooLarge
        )
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotPrime(_) => "not-prime",
            Error::ZeroExponent => "zero-exponent",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::NotInvertible { .. } => "not-invertible",
            Error::IterationCapExceeded { .. } => "iteration-cap-exceeded",
            Error::NoStableGrowth { .. } => "no-stable-growth",
            Error::NotIrreducible { .. } => "not-irreducible",
            Error::NonSquarefree { .. } => "non-squarefree",
            Error::NotSquarefreeOverQ => "not-squarefree-over-q",
            Error::ZeroConstantTerm => "zero-constant-term",
            Error::ZeroPolynomial { .. } => "zero-polynomial",
            Error::PrecisionCapExceeded { .. } => "precision-cap-exceeded",
            Error::InsufficientPrecision => "insufficient-precision",
            Error::ExactDivisionFailure(_) => "exact-division-failure",
            Error::PreconditionViolated(_) => "precondition-violated",
            Error::MissingProjection => "missing-projection",
            Error::PeriodTooLarge { .. } => "period-too-large",
            Error::GridTooLarge { .. } => "grid-too-large",
            Error::EnumerationTooLarge { .. } => "enumeration-too-large",
            Error::DimensionTooLarge(_) => "dimension-too-large",
            Error::TooManyPoints { .. } => "too-many-points",
            Error::DenominatorTooLarge => "denominator-too-large",
            Error::InvalidArgument(_) => "invalid-argument",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
