use thiserror::Error;

use crate::taxonomy::Category;

/// Failures of engine queries. Findings about the knowledge base itself are
/// reported as [`Diagnostic`](crate::Diagnostic)s, not errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("`{0}` is not a process")]
    NotAProcess(String),
    #[error("`{id}` is not a {expected}")]
    WrongCategory { id: String, expected: Category },
    #[error("operation requires option `{0}`")]
    FlagRequired(&'static str),
    #[error("`{0}` has no OSTR fact")]
    MissingOstr(String),
    #[error("parts list is empty")]
    EmptyParts,
}
