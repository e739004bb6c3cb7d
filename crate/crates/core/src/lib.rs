//! Parsing, normalization and analytics for database benchmark results.
//!
//! The crate turns raw sysbench and TPC-H outputs plus `EXPLAIN` captures
//! from PostgreSQL, MySQL and MariaDB into uniform data models:
//!
//! - [`sysbench`]: per-second OLTP metric series and the final report.
//! - [`tpch`]: per-query durations with optional attached plans.
//! - [`lenient_json`]: a JSON reader that tolerates client noise, trailing
//!   commas and duplicate keys.
//! - [`plan`]: dialect detection and dialect-specific plan parsers.
//! - [`normalize`]: operator taxonomy, terminology rendering, metric
//!   percentages and the hierarchy document consumed by tree renderers.
//! - [`analytics`]: windowed averages and cross-run comparisons.

pub mod analytics;
pub mod error;
pub mod lenient_json;
pub mod normalize;
mod numeric;
pub mod plan;
pub mod sysbench;
pub mod tpch;

pub use error::{Error, Result};
