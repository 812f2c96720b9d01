use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at byte {pos}: expected {expected}, found {found}")]
    Parse {
        pos: usize,
        expected: String,
        found: String,
    },

    /// A log-fractional query could not be resolved within the exact
    /// evaluation budget.
    #[error("membership of {n} is too close to an interval endpoint to resolve")]
    AmbiguousBoundary { n: u64 },

    #[error("resource limit: {what} = {requested} exceeds cap {cap}")]
    ResourceLimit {
        what: &'static str,
        requested: u64,
        cap: u64,
    },

    #[error("unknown schedule `{0}`")]
    UnknownSchedule(String),

    #[error("unknown construction key `{0}`")]
    UnknownKey(String),

    #[error("sets are not disjoint: both contain {element}")]
    DisjointnessViolated { element: u64 },

    #[error("sum {sum} exceeds the witness horizon {horizon}")]
    HorizonExceeded { sum: u64, horizon: u64 },

    #[error("no sample found: {0}")]
    SampleExhausted(String),

    #[error("could not materialize class {class}: {reason}")]
    MaterializationFailure { class: usize, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
