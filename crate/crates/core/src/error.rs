use thiserror::Error;

/// Errors produced by the gait engine.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument violated its documented domain.
    #[error("invalid parameter {name}: {reason} (got {value})")]
    InvalidParam {
        name: &'static str,
        reason: &'static str,
        value: f64,
    },

    /// A gait family has no predefined phase set.
    #[error("no predefined phase set for gait family {0}")]
    UnknownGait(String),

    /// Physics produced a non-finite state; the episode must be recycled.
    #[error("simulation state became non-finite at t = {time} s")]
    NonFiniteState { time: f64 },

    /// A training update produced a non-finite loss and was aborted.
    #[error("non-finite loss in update {update}: {detail}")]
    NonFiniteLoss { update: u64, detail: String },

    /// Checkpoint file malformed or incompatible with the expected topology.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    /// Trace CSV malformed.
    #[error("trace error: {0}")]
    Trace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: &'static str, value: f64) -> Self {
        Error::InvalidParam {
            name,
            reason,
            value,
        }
    }
}
