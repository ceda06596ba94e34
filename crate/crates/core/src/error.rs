use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The objective returned a non-finite value (or produced a non-finite
    /// gradient component) at `point`.
    #[error("evaluation failed at {point:?}: got {value}")]
    EvaluationFailed { point: Vec<f64>, value: f64 },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("dataset ingestion failed: {0}")]
    Ingestion(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Evals-to-target is only defined for a positive reference score.
    #[error("metric undefined: reference best {0} is not positive")]
    MetricUndefined(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
