use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// The variants map onto the command-line exit-code contract: domain errors
/// exit with 2, numeric failures with 3 and certification failures with 4.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("c-sum truncation failed at c = {c_max}: best certified tail {best_bound:e}")]
    Truncation { c_max: u64, best_bound: f64 },

    #[error("precision failure: {0}")]
    Precision(String),

    #[error("coefficient table too short: reached n = {reached} before the tail criterion held")]
    TableTooShort { reached: usize },

    #[error("degenerate Petersson norm: p(m) = {0:e} is not positive")]
    DegenerateNorm(f64),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("winding number did not converge: {0}")]
    Winding(String),

    #[error("aliasing: DFT grid {grid} cannot resolve coefficient n = {n}")]
    Aliasing { grid: usize, n: usize },

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("cache format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Aliasing { .. } => 2,
            Error::Certification(_) => 4,
            Error::Format(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
