use thiserror::Error;

use crate::subset::Element;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("element {element} is outside the ground set of size {n}")]
    OutOfDomain { element: Element, n: usize },

    #[error("function family is empty")]
    EmptyFamily,

    #[error("ground set mismatch: expected {expected}, found {found}")]
    GroundMismatch { expected: usize, found: usize },

    #[error("enumeration of {needed} candidates exceeds the budget of {cap}")]
    BudgetExceeded { needed: u128, cap: u64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("k = {k} is too small, at least {required} is required")]
    KTooSmall { k: usize, required: usize },

    #[error("instance carries no copy map with at least {needed} copies per element")]
    MissingCopies { needed: usize },

    #[error("no qualifying {size}-tuple in round {round}: targets are unachievable by any size-k set")]
    Infeasible { round: usize, size: usize },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
