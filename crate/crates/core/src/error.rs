use thiserror::Error;

/// Errors raised by the symbolic layers (algebra, terms, synthesis).
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("variable list mismatch: [{0}] vs [{1}]")]
    VarMismatch(String, String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("missing assignment for variable `{0}`")]
    MissingAssignment(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("division by the zero rational function")]
    DivisionByZero,
    #[error("pole at evaluation point: {0}")]
    Pole(String),
    #[error("value undefined at evaluation point: {0}")]
    Undefined(String),
    #[error("argument is not integer-linear: {0}")]
    NonLinear(String),
    #[error("degree bound overflow (cap {0})")]
    BoundOverflow(u32),
    #[error("certificate failed its own verification gate: residual {0}")]
    CertificateGate(String),
    #[error("zero right-hand side is not normalizable")]
    ZeroRhs,
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
