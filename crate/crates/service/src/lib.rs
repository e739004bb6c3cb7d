//! Session registry and HTTP API for benchmark runs.
//!
//! [`Session`] holds uploaded runs and answers every query the dashboard
//! needs; [`http::router`] exposes it under `/v1`.

pub mod error;
pub mod http;
pub mod session;

pub use error::{ServiceError, ServiceResult};
pub use session::{RunKind, RunPayload, RunRecord, RunSummary, Session};
