use chrono::NaiveDate;
use thiserror::Error;

use crate::region::RegionId;
use crate::series::Field;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("validation failed for {region}{}{}: {reason}",
        .date.map(|d| format!(" on {d}")).unwrap_or_default(),
        .field.map(|f| format!(" ({f})")).unwrap_or_default())]
    Validation {
        region: RegionId,
        date: Option<NaiveDate>,
        field: Option<Field>,
        reason: String,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed document: {0}")]
    Document(String),

    #[error("transient fetch error for {location}: {message}")]
    TransientFetch { location: String, message: String },

    #[error("source error for {location}: {message}")]
    Source { location: String, message: String },

    #[error("all {0} sources failed")]
    AllSourcesFailed(usize),

    #[error("concurrent publication: staged against version {staged}, current is {current}")]
    Conflict { staged: u64, current: u64 },

    #[error("persistence error: {0}")]
    Persist(String),

    #[error("table {table}: {message}")]
    Table { table: &'static str, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn not_found(msg: impl Into<String>) -> Self {
        Error::NotFound(msg.into())
    }

    /// Transient failures may succeed on retry without operator action.
    pub fn is_retryable(&self) -> bool {
        matches!(self, Error::TransientFetch { .. })
    }
}
