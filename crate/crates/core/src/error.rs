use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the range where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The cost oracle produced NaN or an infinity.
    #[error("non-finite cost {value} at sample {index} (decision {decision})")]
    Evaluation {
        index: usize,
        decision: String,
        value: f64,
    },

    /// Exact enumeration requested on a space that is infinite or too large.
    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("oracle failure for instance seed {instance_seed}: {reason}")]
    Oracle { instance_seed: u64, reason: String },

    /// Local descent ran out of iterations (only raised when the refine
    /// configuration is strict).
    #[error("descent hit the iteration limit; best value so far {best_value} at {best_point:?}")]
    NoConvergence {
        best_value: f64,
        best_point: Vec<f64>,
    },

    #[error("rejection sampling gave up after {attempts} attempts: {what}")]
    Rejection { what: String, attempts: usize },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
