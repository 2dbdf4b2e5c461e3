/// Errors produced by construction and evaluation across the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{what}: probabilities sum to {sum}, expected 1 within {tol}")]
    ProbabilitySum { what: &'static str, sum: f64, tol: f64 },

    #[error("{what}: probability {value} outside [0, 1]")]
    ProbabilityRange { what: &'static str, value: f64 },

    #[error("{context}: expected dimension {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{0} must be nonempty")]
    Empty(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("{name}: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("probe measure on wrong space: expected {expected}")]
    ProbeSpace { expected: &'static str },

    #[error("exact cover search limited to {max} points, got {got}")]
    ExactCoverTooLarge { got: usize, max: usize },

    #[error("pseudo-metric violation: {0}")]
    PseudoMetric(String),

    #[error("bound constraint violated: {0}")]
    BoundConstraint(String),
}

pub type Result<T> = std::result::Result<T, Error>;
