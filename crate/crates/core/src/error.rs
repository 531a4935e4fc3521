use thiserror::Error;

/// Errors raised by the samplers, transforms and oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("closed-form transform is only available for the Integer and Shifted rules")]
    UnsupportedRule,

    #[error("quadrature grid rejected: {0}")]
    Grid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        what,
        detail: detail.into(),
    }
}
