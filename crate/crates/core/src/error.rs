use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("precision budget exceeded: {0}")]
    Precision(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("continuation failed at {last_good}: {reason}")]
    Continuation { last_good: String, reason: String },
    #[error("tolerance not met: {0}")]
    Tolerance(String),
    #[error("quadrature resolution insufficient: {0}")]
    Resolution(String),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Domain(_) | Error::Regime(_) | Error::Pole(_) => 2,
            Error::Precision(_) | Error::Resolution(_) => 4,
            Error::Continuation { .. } | Error::Tolerance(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
