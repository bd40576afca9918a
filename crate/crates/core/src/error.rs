use thiserror::Error;

/// Errors produced by the workbench.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("unknown potential family `{0}`")]
    UnknownFamily(String),
    #[error("potential support escapes the computational domain: {0}")]
    SupportOutsideDomain(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
