use thiserror::Error;

/// Errors produced anywhere in the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("leading coefficient {0} is not invertible in the coefficient ring")]
    NonInvertible(String),

    #[error("series truncation too short: need order {required}, have {available}")]
    Truncation { required: i32, available: i32 },

    #[error("unstable topology (g={g}, n={n}): need 2g-2+n > 0")]
    Unstable { g: u32, n: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("memo file: {0}")]
    Persistence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
