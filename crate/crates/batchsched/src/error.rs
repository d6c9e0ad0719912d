//! Error type shared by every module in the crate.

use std::fmt;

/// Everything that can go wrong while building instances, evaluating setup
/// costs, partitioning, or simulating.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A rational was built with a zero denominator.
    ZeroDenominator,
    /// An operation would produce a negative time value.
    NegativeTime(String),
    /// A job is missing the tag a setup model needs (type, library set, point).
    MissingTag { job: usize, what: &'static str },
    /// A tag refers to a weight/point the model does not define.
    UnknownTag { job: usize, what: &'static str, tag: String },
    /// An explicit setup table has no entry for the queried batch.
    MissingTableEntry(String),
    /// A setup model failed structural validation (asymmetry, negative
    /// weight, triangle violation, non-monotone or non-subadditive table).
    InvalidModel(String),
    /// Exact routing requested over more points than the exact limit.
    TspLimitExceeded { points: usize, limit: usize },
    /// Property oracle or exact solver called on a universe above its limit.
    UniverseTooLarge { size: usize, limit: usize },
    /// A batch was built empty or with out-of-range job ids.
    InvalidBatch(String),
    /// A partition request cannot be satisfied (cap infeasible, k = 0, ...).
    InfeasiblePartition(String),
    /// An instance failed validation (duplicate ids, bad machine count, ...).
    InvalidInstance(String),
    /// A strategy issued an action the engine cannot apply.
    IllegalAction(String),
    /// The engine ran out of events while uncompleted jobs remain.
    Livelock,
    /// A trace is incomplete where a complete one is required.
    UnfinishedJobs { missing: Vec<usize> },
    /// Strategy requirements conflict with the engine settings.
    SettingsMismatch(String),
    /// Structured-text input could not be parsed.
    Parse(String),
    /// Underlying I/O failure, carried as text to keep the type comparable.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ZeroDenominator => write!(f, "zero denominator"),
            Error::NegativeTime(what) => write!(f, "negative time value: {what}"),
            Error::MissingTag { job, what } => {
                write!(f, "job {job} is missing required tag `{what}`")
            }
            Error::UnknownTag { job, what, tag } => {
                write!(f, "job {job} has {what} `{tag}` not defined by the setup model")
            }
            Error::MissingTableEntry(key) => {
                write!(f, "explicit setup table has no entry for batch {{{key}}}")
            }
            Error::InvalidModel(why) => write!(f, "invalid setup model: {why}"),
            Error::TspLimitExceeded { points, limit } => {
                write!(f, "exact routing limited to {limit} points, got {points}")
            }
            Error::UniverseTooLarge { size, limit } => {
                write!(f, "exact enumeration limited to {limit} elements, got {size}")
            }
            Error::InvalidBatch(why) => write!(f, "invalid batch: {why}"),
            Error::InfeasiblePartition(why) => write!(f, "infeasible partition: {why}"),
            Error::InvalidInstance(why) => write!(f, "invalid instance: {why}"),
            Error::IllegalAction(why) => write!(f, "illegal strategy action: {why}"),
            Error::Livelock => {
                write!(f, "livelock: no future event exists but jobs remain uncompleted")
            }
            Error::UnfinishedJobs { missing } => {
                write!(f, "trace incomplete: jobs {missing:?} never complete")
            }
            Error::SettingsMismatch(why) => write!(f, "settings mismatch: {why}"),
            Error::Parse(why) => write!(f, "parse error: {why}"),
            Error::Io(why) => write!(f, "i/o error: {why}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
