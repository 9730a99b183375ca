use thiserror::Error;

/// Errors produced by the simulation and bound routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CabError {
    #[error("invalid reservoir: {0}")]
    InvalidSpec(String),

    #[error("invalid policy configuration: {0}")]
    InvalidPolicy(String),

    #[error("horizon {horizon} is shorter than the consideration set size {k}")]
    HorizonTooShort { horizon: u64, k: usize },

    #[error("parameter `{param}` out of domain: {reason}")]
    Domain { param: &'static str, reason: String },

    #[error("series did not converge: {0}")]
    Divergence(String),

    #[error("policy played unknown arm {0}")]
    IllegalAction(u64),
}

impl CabError {
    pub(crate) fn domain(param: &'static str, reason: impl Into<String>) -> Self {
        CabError::Domain {
            param,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = CabError> = std::result::Result<T, E>;
