use thiserror::Error;

/// Errors raised by the algebra, density and counting layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("quadratic field parameter must be nonzero and different from 1, got {0}")]
    InvalidQuadratic(i64),
    #[error("quadratic field parameter {0} is not squarefree")]
    NotSquarefree(i64),
    #[error("minimal polynomial must be monic of degree at least 1")]
    NotMonic,
    #[error("minimal polynomial is reducible over Q")]
    Reducible,
    #[error("could not certify irreducibility: {0}")]
    IrreducibilityUnknown(String),
    #[error("multiplication table is inconsistent: {0}")]
    InvalidTensor(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("the zero ideal is not allowed here")]
    ZeroIdeal,
    #[error("the point set S must not be empty")]
    EmptySet,
    #[error("an empty generator list does not define an ideal")]
    NoGenerators,
    #[error("m must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("the prime window is empty")]
    EmptyWindow,
    #[error("{what} needs about {size:.3e} states, above the cap of {cap}")]
    CapExceeded { what: &'static str, size: f64, cap: u64 },
    #[error("basis transform is not a unimodular integer matrix")]
    NotUnimodular,
    #[error("value out of machine range: {0}")]
    Overflow(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
