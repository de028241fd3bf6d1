use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is missing, malformed or out of range.
    #[error("config error: {key}: {message}")]
    Config { key: String, message: String },

    /// A selection that violates the antenna/user count or pilot-overhead
    /// requirements of a rate bound.
    #[error("infeasible selection: {0}")]
    Infeasible(String),

    /// An API was called with malformed input (wrong vector length, size guard).
    #[error("usage error: {0}")]
    Usage(String),

    /// Subset simulation stopped making progress towards the target event.
    #[error("sampling failure after {levels} levels (last threshold {last_threshold}, {in_target} of {population} samples in target)")]
    SamplingFailure {
        levels: usize,
        last_threshold: f64,
        in_target: usize,
        population: usize,
    },

    /// The optimizer never observed a feasible selection.
    #[error("no feasible selection found after {iterations} iterations")]
    NoSolution { iterations: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
