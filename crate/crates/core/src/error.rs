use thiserror::Error;

/// Errors raised by the divisor-class algebra.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("unbounded expansion: symbol `{0}` has no effectivity bound")]
    UnboundedExpansion(String),

    #[error("symbolic degree: `{0}` must have a concrete integer degree here")]
    SymbolicDegree(String),

    #[error("coefficient is not a plain rational: {0}")]
    SymbolicCoefficient(String),

    #[error(
        "unordered boundary sum needs a swap-symmetric coefficient \
         (f(e'_1,e''_1,...) = f(e''_1,e'_1,...)); got {0}"
    )]
    AsymmetricSum(String),

    #[error("outside supported fragment: {0}")]
    Unsupported(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("not a no-map expression: {0}")]
    NotNoMap(String),

    #[error("context error at line {line}, column {column}: {message}")]
    Context {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
