use thiserror::Error;

/// Errors raised by instance construction, policies, analysis and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GmabError {
    #[error("theta = {theta} lies outside the parameter space [{lo}, {hi}]")]
    Domain { theta: f64, lo: f64, hi: f64 },

    #[error("{family} reward function is not invertible")]
    NotInvertible { family: &'static str },

    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("arm {arm}: {reason}")]
    Construction { arm: usize, reason: String },

    #[error("arm index {arm} out of range for {arms} arms")]
    InvalidArm { arm: usize, arms: usize },

    #[error("minimum suboptimality gap is undefined: no suboptimal arm at theta = {theta}")]
    MissingGap { theta: f64 },

    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },
}

impl GmabError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        GmabError::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        GmabError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = GmabError> = std::result::Result<T, E>;
