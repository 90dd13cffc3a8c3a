use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LrpError {
    /// A parameter violated its documented domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An exhaustive computation would exceed its state budget.
    #[error("state budget exceeded: more than {budget} states required")]
    BudgetExceeded { budget: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A logarithm (or ratio) of a non-positive quantity was requested.
    #[error("non-positive value {value} at scale {scale}")]
    NonPositive { scale: u64, value: f64 },
}

pub type Result<T, E = LrpError> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> LrpError {
    LrpError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
