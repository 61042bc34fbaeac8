use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("episode is over (slot {slot} of {horizon}); call reset first")]
    EpisodeOver { slot: usize, horizon: usize },

    #[error("action out of bounds: {0}")]
    InvalidAction(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("replay buffer holds {len} experiences, batch of {batch} requested")]
    BufferUnderfilled { len: usize, batch: usize },

    #[error("stale replay index {slot}: entry was overwritten since sampling")]
    StaleIndex { slot: usize },

    #[error(
        "exhaustive search over 2^{exponent} phase configurations exceeds the cap 2^{cap_exponent}; \
         use fewer RIS elements or fewer quantization bits"
    )]
    InstanceTooLarge { exponent: u32, cap_exponent: u32 },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("malformed CSV {path}, row {row}: {reason}")]
    MalformedCsv {
        path: String,
        row: usize,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("plot rendering failed: {0}")]
    Plot(String),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
