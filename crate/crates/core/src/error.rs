use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or shape is invalid for the requested computation.
    #[error("configuration error: {0}")]
    Config(String),

    /// A computation produced a NaN or an infinity.
    #[error("numeric error in `{op}`: {detail}")]
    Numeric { op: &'static str, detail: String },

    /// An operation was called outside its domain.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An experiment configuration failed validation.
    #[error("usage error in field `{field}`: {message}")]
    Usage { field: String, message: String },

    /// The requested diagnostic does not exist for this game.
    #[error("unavailable: {0}")]
    Unavailable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn numeric(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Numeric {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn usage(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Usage {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Returns `Err(Numeric)` naming `op` if any entry of `xs` is not finite.
pub(crate) fn ensure_finite(op: &'static str, xs: &[f64]) -> Result<()> {
    match xs.iter().position(|x| !x.is_finite()) {
        None => Ok(()),
        Some(i) => Err(Error::numeric(op, format!("entry {i} is {}", xs[i]))),
    }
}
