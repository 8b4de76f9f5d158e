use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("division by exact zero")]
    DivisionByZero,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("not a unit congruent to 1 mod p")]
    NotAUnitNearOne,
    #[error("nonzero residue at {0}")]
    NonzeroResidue(String),
    #[error("point outside the domain: {0}")]
    OutOfDomain(String),
    #[error("word exceeds truncation weight {0}")]
    WeightExceeded(usize),
    #[error("series is not invertible")]
    NonInvertible,
    #[error("points are not in the same residue disc")]
    NotSameDisc,
    #[error("lift condition violated: {0}")]
    LiftConditionViolated(String),
    #[error("audit failed: {0}")]
    AuditFailed(String),
    #[error("cache error: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::PrecisionExhausted(_) => 2,
            Error::AuditFailed(_) => 3,
            _ => 1,
        }
    }
}
