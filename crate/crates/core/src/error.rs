use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the auction model, dynamics and simulation engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid value distribution: v_M ({v_max}) must be finite and exceed v_m ({v_min})")]
    InvalidDistribution { v_min: f64, v_max: f64 },

    #[error("an auction needs at least 2 bidders, got {0}")]
    TooFewBidders(usize),

    #[error("value {value} lies outside the support [{v_min}, {v_max}]")]
    ValueOutOfSupport { value: f64, v_min: f64, v_max: f64 },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("theorem hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("the two-state identity needs exactly 2 states, got {0}")]
    WrongStateCount(usize),

    #[error("bids ({bids}) and values ({values}) differ in length")]
    LengthMismatch { bids: usize, values: usize },

    #[error("at least {min} Monte-Carlo samples are required, got {got}")]
    TooFewSamples { min: u64, got: u64 },
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
