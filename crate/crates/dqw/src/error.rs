use thiserror::Error;

/// Errors surfaced by the numerical engines.
#[derive(Debug, Clone, Error)]
pub enum DqwError {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A site window is too small for the requested operation.
    #[error("window too small: {0}")]
    WindowTooSmall(String),

    /// Truncation would drop more mass than the declared budget.
    #[error("tail loss: {0}")]
    TailLoss(String),

    /// The operation would exceed the configured memory budget.
    #[error("resource limit: need ~{needed_bytes} bytes, budget {budget_bytes}; {hint}")]
    ResourceLimit {
        needed_bytes: u64,
        budget_bytes: u64,
        hint: String,
    },

    /// A matrix failed a structural validation check.
    #[error("validation failed: {0}")]
    Validation(String),
}

impl DqwError {
    pub fn domain(msg: impl Into<String>) -> Self {
        DqwError::Domain(msg.into())
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        DqwError::Validation(msg.into())
    }
}
