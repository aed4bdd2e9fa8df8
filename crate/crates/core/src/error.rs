use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed configuration or input file.
    #[error("invalid input: {0}")]
    Input(String),
    /// Arguments outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("operation not supported: {0}")]
    Unsupported(String),
    #[error("numeric failure: {msg} (residual {residual:e})")]
    Numeric { msg: String, residual: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn numeric(msg: impl Into<String>, residual: f64) -> Self {
        Error::Numeric { msg: msg.into(), residual }
    }

    /// Prefixes the message with the speed at which the failure happened.
    pub fn at_speed(self, v: f64) -> Self {
        let tag = |m: String| format!("at V = {v}: {m}");
        match self {
            Error::Input(m) => Error::Input(tag(m)),
            Error::Domain(m) => Error::Domain(tag(m)),
            Error::Unsupported(m) => Error::Unsupported(tag(m)),
            Error::Numeric { msg, residual } => Error::Numeric { msg: tag(msg), residual },
            Error::Precondition(m) => Error::Precondition(tag(m)),
            Error::Invariant(m) => Error::Invariant(tag(m)),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
