use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("operation on an empty polyhedron")]
    EmptySet,
    #[error("axis line does not meet the set")]
    NoAxisIntersection,
    #[error("set is unbounded below along the axis")]
    Unbounded,
    #[error("point is not in the hull")]
    NotInHull,
    #[error("weak no-arbitrage fails for this model")]
    NoArbitrageViolated,
    #[error("endowment insufficient to superhedge")]
    EndowmentInsufficient,
    #[error("resource cap exceeded: {0}")]
    CapExceeded(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("internal verification failure: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
