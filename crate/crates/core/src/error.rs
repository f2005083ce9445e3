use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A sequence is too long to enumerate all of its subsequences.
    #[error("sequence of length {len} exceeds the enumeration cap of {cap} with unbounded pattern length")]
    CapExceeded { len: usize, cap: usize },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("input contains no transaction records")]
    EmptyInput,

    #[error("invalid time window: start {start} is after end {end}")]
    InvalidWindow { start: String, end: String },

    #[error("invalid mining configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),

    /// Two miners disagreed on the same input. Always a correctness bug.
    #[error("miners disagree on dataset {dataset}, min_support {min_support}: {detail}")]
    Mismatch {
        dataset: String,
        min_support: String,
        detail: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
