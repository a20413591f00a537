use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} is outside the supported range 1..={max}", max = crate::lattice::MAX_DIM)]
    InvalidDimension(u32),

    #[error("depth {0} is outside the supported range 1..={max}", max = crate::lattice::MAX_DEPTH)]
    InvalidDepth(u32),

    #[error("index {index} is out of range 1..={max}")]
    IndexOutOfRange { index: u64, max: u64 },

    #[error("mismatched operands: {0}")]
    Mismatch(String),

    #[error("enumeration of {required} items exceeds the budget of {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("invalid quadrant set: {0}")]
    InvalidQuadrants(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("replay failed at step {step} ({label}): {reason}")]
    ReplayFailed {
        step: usize,
        label: String,
        reason: String,
    },

    #[error("result cache at {0} holds no usable records")]
    EmptyCache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
