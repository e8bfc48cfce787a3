use num_bigint::BigInt;
use thiserror::Error;

/// Errors raised by the arithmetic, search and certification layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("input must be nonzero")]
    ZeroInput,
    #[error("factorization budget exceeded: {0}")]
    FactorizationBudget(String),
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error("{0} is not squarefree")]
    NotSquarefree(BigInt),
    #[error("point is not on the curve")]
    OffCurve,
    #[error("singular curve (zero discriminant)")]
    SingularCurve,
    #[error("degenerate quartic: {0}")]
    DegenerateQuartic(&'static str),
    #[error("point lies in the exceptional set of the birational map; retry with a translate")]
    ExceptionalSet,
    #[error("point lies on the branch locus s = 0")]
    BranchLocus,
    #[error("p-adic precision budget exceeded at p = {0}")]
    PrecisionBudget(u64),
    #[error("ledger violation: {0}")]
    LedgerViolation(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
