use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is outside the supported range [1, {max}]", max = crate::zn::MAX_MODULUS)]
    ModulusOutOfRange(usize),
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: usize, right: usize },
    #[error("{a} is not a unit modulo {n}")]
    NotAUnit { a: i64, n: usize },
    #[error("cannot parse `{token}`: {reason}")]
    Parse { token: String, reason: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parameter constraint violated: {0}")]
    Parameter(String),
    #[error("consistency failure: {0}")]
    Consistency(String),
    #[error("cannot merge reports: {0}")]
    Merge(String),
}
