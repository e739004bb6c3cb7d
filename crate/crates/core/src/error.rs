use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the parsers and analytics can report.
///
/// Each variant maps to a stable machine-readable code (see [`Error::code`])
/// which the service and CLI surface verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed input at line {line}: {reason}")]
    MalformedInput { line: usize, reason: String },

    #[error("invalid numeric token `{token}` at line {line}")]
    NumericOverflow { line: usize, token: String },

    #[error("query {query_no} appears twice with conflicting durations")]
    DuplicateQuery { query_no: u32 },

    #[error("query {query_no} is not part of the run")]
    UnknownQuery { query_no: u32 },

    #[error("capture does not match any supported EXPLAIN dialect")]
    UnknownDialect,

    #[error("invalid JSON at line {line}, column {column}: {reason}")]
    Json {
        line: usize,
        column: usize,
        reason: String,
    },

    #[error("plan structure error: {0}")]
    PlanStructure(String),

    #[error("no node carries the {0} metric")]
    MetricUnavailable(&'static str),

    #[error("no sample falls inside [{from}, {to}]")]
    EmptyWindow { from: u64, to: u64 },

    #[error("invalid window: from {from} is after to {to}")]
    InvertedWindow { from: u64, to: u64 },

    #[error("run name `{0}` is used more than once")]
    DuplicateRunName(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedInput { .. } => "MalformedInput",
            Error::NumericOverflow { .. } => "NumericOverflow",
            Error::DuplicateQuery { .. } => "DuplicateQuery",
            Error::UnknownQuery { .. } => "UnknownQuery",
            Error::UnknownDialect => "UnknownDialect",
            Error::Json { .. } => "JsonError",
            Error::PlanStructure(_) => "PlanStructureError",
            Error::MetricUnavailable(_) => "MetricUnavailable",
            Error::EmptyWindow { .. } => "EmptyWindow",
            Error::InvertedWindow { .. } => "ValidationError",
            Error::DuplicateRunName(_) => "DuplicateRunName",
        }
    }

    /// True for errors raised while reading an input file or capture.
    pub fn is_parse_error(&self) -> bool {
        matches!(
            self,
            Error::MalformedInput { .. }
                | Error::NumericOverflow { .. }
                | Error::DuplicateQuery { .. }
                | Error::UnknownDialect
                | Error::Json { .. }
                | Error::PlanStructure(_)
        )
    }

    pub(crate) fn malformed(line: usize, reason: impl Into<String>) -> Self {
        Error::MalformedInput {
            line,
            reason: reason.into(),
        }
    }

    pub(crate) fn structure(reason: impl Into<String>) -> Self {
        Error::PlanStructure(reason.into())
    }
}
