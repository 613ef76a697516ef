use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// `is_validation` separates bad input (exit code 2 in the CLI) from
/// numerical failure (exit code 3).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("argument outside the supported domain: {0}")]
    Domain(String),
    #[error("matrix entry overflow (|entry| > 1e300)")]
    Overflow,
    #[error("no convergence after {iterations} iterations (last change {last_change:e})")]
    NonConvergence { iterations: usize, last_change: f64 },
    #[error("pole hit while evaluating continued fraction at level {level}")]
    PoleHit { level: usize },
    #[error("{0} of the SDE steps moved Z by more than Z_max/2; reduce dt")]
    StepTooLarge(f64),
    #[error("Rice tail unresolved: outer-decade estimates vary by {0:.1}%")]
    TailUnresolved(f64),
    #[error("decay fit unstable: r^2 = {0:.4} < 0.99")]
    FitUnstable(f64),
    #[error("quadrature failed to reach tolerance ({0})")]
    Quadrature(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Invalid(_) | Error::Domain(_) | Error::Io(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Invalid(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
