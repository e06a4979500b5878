use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or argument falls outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("event {event} is not applicable to partition {partition}")]
    InapplicableEvent { event: String, partition: String },

    #[error("bound exceeded: {what} = {value} exceeds the limit {limit}")]
    BoundExceeded {
        what: &'static str,
        value: u64,
        limit: u64,
    },

    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("runaway guard: more than {limit} events before t = {time}")]
    Runaway { limit: u64, time: f64 },

    #[error("time {t} is outside the trajectory window [0, {horizon}]")]
    OutOfRange { t: f64, horizon: f64 },

    #[error("conditioning slice at size {0} has zero mass")]
    ZeroMassSlice(usize),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
