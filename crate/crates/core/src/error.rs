use thiserror::Error;

/// Errors produced by the library and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on the arguments of an operation does not hold.
    #[error("invalid input: {0}")]
    Input(String),
    /// A numerical routine failed to converge or produced a non-finite value.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// An experiment or audit configuration is inconsistent.
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure_input {
    ($cond:expr, $($arg:tt)+) => {
        if !($cond) {
            return Err($crate::Error::Input(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure_input;
