use thiserror::Error;

/// Errors raised by the library's validating constructors and operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("binomial top index must be non-negative, got {0}")]
    NegativeBinomialTop(i64),

    #[error("exact integer overflow while evaluating {0}")]
    Overflow(&'static str),

    #[error("parameters out of range for {identity}: {reason}")]
    IdentityPrecondition { identity: &'static str, reason: String },

    #[error("invalid system parameters: {0}")]
    InvalidParams(String),

    #[error("state has length {got}, expected {expected}")]
    StateLength { expected: usize, got: usize },

    #[error("saturation width must be positive")]
    NonPositiveDelta,

    #[error("index k = {k} below the minimum {min}")]
    IndexTooSmall { k: u64, min: u64 },

    #[error("|y| = {y} is inside the linear band |y| <= h^m r = {bound}")]
    LinearRegime { y: f64, bound: f64 },

    #[error("isochronous index exceeds the representable range")]
    IndexOverflow,

    #[error("control sequence must not be empty")]
    EmptyControls,

    #[error("vertex index {k} out of range for {family:?}")]
    VertexIndex { family: crate::geometry::VertexFamily, k: u64 },

    #[error("malformed hyperplane: {0}")]
    MalformedHyperplane(String),

    #[error("invalid tracker configuration: {0}")]
    InvalidTracker(String),

    #[error("invalid signal specification: {0}")]
    InvalidSignal(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("empty input sequence")]
    EmptyInput,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
