use thiserror::Error;

/// Errors raised by the step maps, validators and estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    /// A denominator fell below the zero guard.
    #[error("zero divisor: |denominator| = {denominator:e} at c = {at}")]
    ZeroDivisor { at: f64, denominator: f64 },

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Not enough iterates inside the estimation window.
    #[error("insufficient data: {usable} usable iterates, need at least {needed}")]
    InsufficientData { usable: usize, needed: usize },

    #[error("requested depth {requested} exceeds the cap of {cap}")]
    DepthBudget { requested: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, RootError>;
