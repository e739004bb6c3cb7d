use benchvis_core::Error as CoreError;
use thiserror::Error;

pub type ServiceResult<T> = std::result::Result<T, ServiceError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ServiceError {
    #[error("no run with id `{0}`")]
    UnknownRun(String),

    #[error("a {kind} run named `{name}` already exists")]
    NameTaken { kind: &'static str, name: String },

    #[error("run `{id}` is a {actual} run, expected {expected}")]
    WrongKind {
        id: String,
        expected: &'static str,
        actual: &'static str,
    },

    #[error("query {0} is not part of the run")]
    UnknownQuery(u32),

    #[error("no plan is attached to query {0}")]
    NoPlanAttached(u32),

    #[error("{0}")]
    Validation(String),

    /// A parser rejected the uploaded bytes or an attached plan.
    #[error("{0}")]
    Parser(CoreError),

    /// An analytics precondition failed, e.g. an empty window.
    #[error("{0}")]
    Analytics(CoreError),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownRun(_) => "UnknownRun",
            ServiceError::NameTaken { .. } => "NameTaken",
            ServiceError::WrongKind { .. } => "WrongKind",
            ServiceError::UnknownQuery(_) => "UnknownQuery",
            ServiceError::NoPlanAttached(_) => "NoPlanAttached",
            ServiceError::Validation(_) => "ValidationError",
            ServiceError::Parser(_) => "ParserError",
            ServiceError::Analytics(e) => e.code(),
        }
    }

    /// Code of the underlying engine error, if any.
    pub fn cause(&self) -> Option<&'static str> {
        match self {
            ServiceError::Parser(e) => Some(e.code()),
            _ => None,
        }
    }
}

impl From<CoreError> for ServiceError {
    fn from(e: CoreError) -> Self {
        if e.is_parse_error() {
            ServiceError::Parser(e)
        } else {
            match e {
                CoreError::UnknownQuery { query_no } => ServiceError::UnknownQuery(query_no),
                CoreError::InvertedWindow { .. } => ServiceError::Validation(e.to_string()),
                other => ServiceError::Analytics(other),
            }
        }
    }
}
