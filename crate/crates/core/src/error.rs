use thiserror::Error;

use crate::interval::Interval;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid index: {0}")]
    InvalidIndex(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("index {index} is beyond the {len}-entry table and no tail model is set")]
    TableExhausted { index: u64, len: u64 },
    #[error("undefined: {0}")]
    Undefined(String),
    #[error("guard exceeded: {0}")]
    GuardExceeded(String),
    #[error("ambiguous: {0}")]
    Ambiguous(String),
    #[error("enclosure {best} is wider than tolerance {tol} ({reason})")]
    Inconclusive {
        best: Interval,
        tol: f64,
        reason: String,
    },
    #[error("premise violated: {0}")]
    PremiseViolated(String),
    #[error("identity violated: {0}")]
    IdentityViolated(String),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
