use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A precondition stated by the caller does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// An enumeration would exceed its configured cap.
    #[error("capacity exceeded: {what} would exceed the cap of {cap}")]
    Capacity { what: String, cap: usize },
    /// An iterative search ran out of budget before reaching its goal.
    #[error("budget exhausted after {steps} steps (best value reached {best})")]
    Budget { steps: usize, best: String },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
