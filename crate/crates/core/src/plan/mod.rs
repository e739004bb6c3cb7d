//! `EXPLAIN` capture parsing.
//!
//! Each supported DBMS has its own output format. The parsers here turn a
//! capture into a [`RawPlanNode`] tree that still carries dialect-native
//! operator labels; [`crate::normalize`] maps those onto the shared taxonomy.

mod mariadb;
mod mysql;
mod postgres;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lenient_json::{parse_document, JsonDoc};

pub use mariadb::parse_mariadb_plan;
pub use mysql::parse_mysql_plan;
pub use postgres::parse_postgres_plan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dialect {
    Postgres,
    #[serde(rename = "mysql")]
    MySql,
    #[serde(rename = "mariadb")]
    MariaDb,
}

impl Dialect {
    pub const ALL: [Dialect; 3] = [Dialect::Postgres, Dialect::MySql, Dialect::MariaDb];

    pub fn as_str(self) -> &'static str {
        match self {
            Dialect::Postgres => "postgres",
            Dialect::MySql => "mysql",
            Dialect::MariaDb => "mariadb",
        }
    }

    /// Whether a node's cost already includes the cost of its inputs.
    pub fn cumulative_costs(self) -> bool {
        matches!(self, Dialect::Postgres)
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dialect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "postgres" | "postgresql" | "pg" => Ok(Dialect::Postgres),
            "mysql" => Ok(Dialect::MySql),
            "mariadb" => Ok(Dialect::MariaDb),
            other => Err(format!("unknown dialect `{other}`")),
        }
    }
}

/// An operator as reported by one DBMS, before taxonomy mapping.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawPlanNode {
    pub raw_op_name: String,
    pub cost: Option<f64>,
    pub rows: Option<f64>,
    pub relation: Option<String>,
    pub condition: Option<String>,
    pub extras: BTreeMap<String, String>,
    pub children: Vec<RawPlanNode>,
}

impl RawPlanNode {
    pub fn new(raw_op_name: impl Into<String>) -> Self {
        RawPlanNode {
            raw_op_name: raw_op_name.into(),
            ..Default::default()
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(RawPlanNode::node_count).sum::<usize>()
    }

    /// Pre-order traversal.
    pub fn walk(&self) -> Vec<&RawPlanNode> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            out.push(node);
            stack.extend(node.children.iter().rev());
        }
        out
    }
}

static PG_COST_ANNOTATION: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\(cost=\d+(?:\.\d+)?\.\.\d+(?:\.\d+)?\s+rows=\d+\s+width=\d+\)").unwrap()
});

/// Identifies which DBMS produced a capture.
///
/// Signatures are checked in priority order: PostgreSQL (`"Plan"` key in
/// the first array element, or text cost annotations), then MySQL
/// (`"query_block"` with a `"cost_info"` object), then MariaDB
/// (`"query_block"` without `"cost_info"`).
pub fn detect_dialect(text: &str) -> Result<Dialect> {
    if text.trim().is_empty() {
        return Err(Error::UnknownDialect);
    }
    if let Ok(doc) = parse_document(text) {
        let first = match &doc {
            JsonDoc::Array(items) => items.first(),
            other => Some(other),
        };
        if let Some(obj) = first.filter(|d| d.is_object()) {
            if obj.get("Plan").is_some_and(JsonDoc::is_object) {
                return Ok(Dialect::Postgres);
            }
            if let Some(block) = obj.get("query_block").filter(|b| b.is_object()) {
                return Ok(if has_cost_info(block) {
                    Dialect::MySql
                } else {
                    Dialect::MariaDb
                });
            }
        }
    }
    if PG_COST_ANNOTATION.is_match(text) {
        return Ok(Dialect::Postgres);
    }
    Err(Error::UnknownDialect)
}

fn has_cost_info(doc: &JsonDoc) -> bool {
    match doc {
        JsonDoc::Object(entries) => entries
            .iter()
            .any(|(k, v)| (k == "cost_info" && v.is_object()) || has_cost_info(v)),
        JsonDoc::Array(items) => items.iter().any(has_cost_info),
        _ => false,
    }
}

/// Parses a capture with the parser for `dialect`.
pub fn parse_plan(text: &str, dialect: Dialect) -> Result<RawPlanNode> {
    match dialect {
        Dialect::Postgres => parse_postgres_plan(text),
        Dialect::MySql => parse_mysql_plan(text),
        Dialect::MariaDb => parse_mariadb_plan(text),
    }
}

/// Detects the dialect and parses.
pub fn parse_any(text: &str) -> Result<(Dialect, RawPlanNode)> {
    let dialect = detect_dialect(text)?;
    Ok((dialect, parse_plan(text, dialect)?))
}

pub(crate) fn non_negative_attr(value: Option<f64>, what: &str, op: &str) -> Result<Option<f64>> {
    match value {
        Some(v) if !(v.is_finite() && v >= 0.0) => Err(Error::structure(format!(
            "{what} of `{op}` must be a finite non-negative number, got {v}"
        ))),
        other => Ok(other),
    }
}
