use thiserror::Error;

/// Errors raised by the laboratory's operations. All of them describe bad
/// input; none is a runtime failure of an algorithm.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("state {state} out of range (state count {state_count})")]
    StateOutOfRange { state: usize, state_count: usize },

    #[error("action index {action} out of range ({action_count} actions)")]
    ActionOutOfRange { action: usize, action_count: usize },

    #[error("partition covers {found} states, expected {expected}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("partition is not a refinement of its predecessor")]
    NotARefinement,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("{what} has {size} states, above the brute-force bound of {bound}")]
    BoundExceeded {
        what: &'static str,
        size: usize,
        bound: usize,
    },

    #[error("more than {limit} valid refinements exist")]
    LimitExceeded { limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
