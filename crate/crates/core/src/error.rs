use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("right-hand side vector is zero; a nonzero vector is required here")]
    ZeroRhs,

    #[error("first nonzero index {ell} is outside 1..={k}")]
    EllOutOfRange { ell: u32, k: u32 },

    #[error("s = {s} is not below the critical value k(k+1)/2 = {critical}")]
    NotSubcritical { s: u32, critical: u32 },

    #[error("mismatched tables: {0}")]
    Mismatch(String),

    #[error("budget exceeded: {what} needs {needed}, limit is {limit}")]
    Budget {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
