use thiserror::Error;

/// Errors raised by the library. Domain errors map to CLI exit code 1.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OagError {
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("scope error: {0}")]
    Scope(String),
    #[error("spec mismatch: {0}")]
    SpecMismatch(String),
    #[error("operation requires a computable spec (all components realized, no omega_tower)")]
    NotComputable,
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("invalid level {level} for a spec with {k} components")]
    BadLevel { level: usize, k: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("subgroup is not contained in the larger one")]
    NonContainment,
    #[error("infinite index: {0}")]
    InfiniteIndex(String),
    #[error("rewrite error: {0}")]
    Rewrite(String),
    #[error("enumeration refused: {needed} points exceed the cap of {cap}")]
    EnumerationCap { needed: u128, cap: u128 },
    #[error("atom budget exceeded: {size} > {budget}")]
    Budget { size: usize, budget: usize },
    #[error("pattern hypothesis `{condition}` failed: {detail}")]
    Hypothesis { condition: String, detail: String },
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, OagError>;
