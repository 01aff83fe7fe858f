use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZrpError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("divergent: {0}")]
    Divergent(String),
    #[error("{what} did not converge: value {value:e}, estimated error {error:e}")]
    NonConvergence {
        what: String,
        value: f64,
        error: f64,
    },
    #[error("memory budget exceeded: {0}")]
    Budget(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("rejection sampler exhausted after {0} attempts")]
    Exhausted(u64),
    #[error("unnormalizable conditional law: {0}")]
    Unnormalizable(String),
}

pub type Result<T> = std::result::Result<T, ZrpError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(ZrpError::Domain(msg.into()))
}
