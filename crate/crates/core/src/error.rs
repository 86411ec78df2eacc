use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Pushed entries must carry strictly increasing global times.
    #[error("ordering error: expected global_time {expected}, got {got}")]
    Ordering { expected: u64, got: u64 },

    /// Sampling from an empty buffer or one whose total weight is zero.
    #[error("sampling error: {0}")]
    Sampling(String),

    /// A solver or accumulation failed to reach required accuracy.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A fitted value escaped the admissible range.
    #[error("divergence: |Q| reached {value:.6e}, limit {limit:.6e}")]
    Divergence { value: f64, limit: f64 },

    /// Malformed environment file.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
