use thiserror::Error;

/// Errors raised by the optimizers and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// An operation was invoked on a state it cannot handle.
    #[error("invalid state: {0}")]
    State(String),
    /// A configuration is inconsistent or infeasible.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// The evaluation budget cannot cover the requested evaluation.
    #[error("evaluation budget exhausted ({used} of {cap} used)")]
    BudgetExhausted { used: u64, cap: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
