use thiserror::Error;

/// Errors raised by heckelab operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid weight {0}: expected an even integer >= 4")]
    InvalidWeight(i64),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("degenerate Hecke spectrum at weight {weight}: no separating operator T_2 + c T_3 with c <= 10")]
    DegenerateSpectrum { weight: u32 },
    #[error("Deligne bound violated: |lambda({p})| = {value} > 2")]
    DeligneViolation { p: u64, value: f64 },
    #[error("pole: {0}")]
    Pole(String),
    #[error("cross-validation failed: {0}")]
    CrossValidation(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported range: {0}")]
    UnsupportedRange(String),
    #[error("degenerate basis: {0}")]
    DegenerateBasis(String),
    #[error("bound violated: {0}")]
    BoundViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
