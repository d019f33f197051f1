use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("exponent p must satisfy 1 < p < inf, got {0}")]
    InvalidExponent(f64),

    #[error("field `{field}` has length {found}, expected {expected}")]
    LengthMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("field `{field}` must be positive at node {node}, got {value}")]
    NonPositive {
        field: &'static str,
        node: usize,
        value: f64,
    },

    #[error("field `{field}` must be nonnegative at node {node}, got {value}")]
    Negative {
        field: &'static str,
        node: usize,
        value: f64,
    },

    #[error("field `{field}` is not finite at node {node}")]
    NonFinite { field: &'static str, node: usize },

    #[error("depth {0} is too large")]
    DepthTooLarge(u32),

    #[error("node index {node} is outside 1..={max}")]
    NodeOutOfRange { node: usize, max: usize },

    #[error("zero denominator: {0}")]
    ZeroDenominator(&'static str),

    #[error("point {point:?} is outside the domain: {violations}")]
    Domain { point: [f64; 4], violations: String },

    #[error("point {0:?} is a singular boundary point (f = 0 with p < 2)")]
    BoundarySingular([f64; 4]),

    #[error("testing condition fails at node {node}: {source}")]
    NodeDomain { node: usize, source: Box<Error> },

    #[error("non-finite gradient at iteration {iteration}")]
    NonFiniteGradient { iteration: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("unknown policy `{0}`")]
    UnknownPolicy(String),

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
