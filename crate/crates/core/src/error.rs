use thiserror::Error;

/// Errors reported by the integrators and the experiment drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state became non-finite or exceeded the overflow cap at t = {t}")]
    Overflow { t: f64 },

    #[error("Newton iteration did not converge after {iters} iterations at t = {t}")]
    SolverFailure { t: f64, iters: usize },

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("history window: {0}")]
    History(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bracketing failed: {0}")]
    Bracket(String),

    #[error("parameter file: {0}")]
    Params(String),

    #[error("config: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
