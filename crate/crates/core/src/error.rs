use alloc::string::String;

use crate::model::ModelError;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    Domain(String),
    #[error("input has {got} values but the domain has {expected} parameters")]
    Arity { expected: usize, got: usize },
    #[error("value {value} of parameter `{param}` outside [{min}, {max}]")]
    OutOfBounds {
        param: String,
        value: i64,
        min: i64,
        max: i64,
    },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("training failed: {0}")]
    Training(String),
    #[error("invalid model spec: {0}")]
    Spec(String),
    #[error("internal invariant broken: {0}")]
    Invariant(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
