use thiserror::Error;

/// Failure modes shared across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter {name} = {value} out of domain ({requirement})")]
    ParameterDomain {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),

    #[error("index {index} out of range for a distribution with {len} entries")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("index tuples have unequal totals ({left} vs {right})")]
    UnequalTotals { left: usize, right: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("root not bracketed on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("truncation insufficient: tail mass {tail:.3e} exceeds {limit:.1e}")]
    TruncationInsufficient { tail: f64, limit: f64 },

    #[error("the curve P1 = P0 (-ln P0) is convex; its closure needs no chord")]
    NoChordNeeded,

    #[error("the (P0,P1) boundary curve is convex and has no inflection point")]
    NoInflection,

    #[error("zero coordinate rejected by boundary relation")]
    ZeroCoordinate,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
