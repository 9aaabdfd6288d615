use thiserror::Error;

/// Errors raised by space construction, map analysis and operator algebra.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size error: {points} points exceeds the point cap {cap}")]
    Size { points: u128, cap: usize },

    #[error(
        "connectivity error: graph is disconnected (point {unreachable} unreachable from point 0)"
    )]
    Disconnected { unreachable: usize },

    #[error("invalid metric: {0}")]
    Metric(String),

    #[error("triangle inequality violated at ({x}, {y}, {z}): d(x,z)={xz} > d(x,y)+d(y,z)={via}")]
    Triangle {
        x: usize,
        y: usize,
        z: usize,
        xz: u64,
        via: u64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("injectivity error: points {first} and {second} both map to {value}")]
    NotInjective {
        first: usize,
        second: usize,
        value: usize,
    },

    #[error("group-axiom error: {0}")]
    GroupAxiom(String),

    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("numeric error: {message} (bracket [{lower}, {upper}])")]
    Numeric {
        message: String,
        lower: f64,
        upper: f64,
    },

    #[error("malformed embedding: {0}")]
    MalformedEmbedding(String),

    #[error("frame error: {0}")]
    Frame(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error(
        "decomposition error: no companion for x={x}, y'={y_prime} within delta={delta} at K={k}"
    )]
    Decomposition {
        x: usize,
        y_prime: usize,
        delta: u64,
        k: u64,
    },

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
