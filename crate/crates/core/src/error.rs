use thiserror::Error;

/// Failures raised by library operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain the operation accepts.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// A numerical routine failed to reach its tolerance.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// A function was applied outside its domain (e.g. a fractional power of an indefinite matrix).
    #[error("domain error: {0}")]
    Domain(String),
    /// The requested computation exceeds the evaluation budget.
    #[error("budget exceeded: {0}")]
    Budget(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Parameter(_) => "parameter",
            Self::Numerical(_) => "numerical",
            Self::Domain(_) => "domain",
            Self::Budget(_) => "budget",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
