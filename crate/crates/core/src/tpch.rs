//! TPC-H result file parsing.
//!
//! A result file is a sequence of query blocks. A block opens with a header
//! line, either `-- Query <N>` or a `Q<N>` marker at the start of a line, and
//! carries one or more timing lines in psql (`Time: <x> ms`) or mysql client
//! (`<n> rows in set (<y> sec)`, `Empty set (<y> sec)`) form. Several timing
//! lines in one block are summed, which covers multi-statement queries.
//!
//! An `EXPLAIN` capture may be embedded inside a block between a line
//! `-- Plan` (or `-- EXPLAIN`) and a line `-- End Plan`, or the next block
//! header. Timing lines inside a capture are part of the capture.
//! Retrieved result rows are skipped.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::non_negative;

pub const MIN_QUERY: u32 = 1;
pub const MAX_QUERY: u32 = 22;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub query_no: u32,
    pub duration_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_source: Option<String>,
}

/// Per-query results ordered by query number, at most one per query.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TpchRun {
    pub results: Vec<QueryResult>,
}

impl TpchRun {
    pub fn get(&self, query_no: u32) -> Option<&QueryResult> {
        self.results
            .binary_search_by_key(&query_no, |r| r.query_no)
            .ok()
            .map(|i| &self.results[i])
    }

    pub fn query_numbers(&self) -> impl Iterator<Item = u32> + '_ {
        self.results.iter().map(|r| r.query_no)
    }

    pub fn total_duration_ms(&self) -> f64 {
        self.results.iter().map(|r| r.duration_ms).sum()
    }
}

static QUERY_HEADER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*--\s*query\s*#?\s*(?P<n>\d+)\b").unwrap());
static Q_MARKER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*(?:--\s*)?Q(?P<n>\d+)(?:\s*:.*|\s.*)?$").unwrap());
static PSQL_TIME: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*Time:\s*(?P<v>\S+)\s*ms\b").unwrap());
static MYSQL_TIME: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^\s*(?:\d+\s+rows?\s+in\s+set|Empty\s+set)\b.*\(\s*(?P<v>\S+)\s+sec\s*\)\s*$")
        .unwrap()
});
static PLAN_START: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*--\s*(?:plan|explain)\s*:?\s*$").unwrap());
static PLAN_END: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*--\s*end\s+(?:plan|explain)\s*$").unwrap());

struct Block {
    query_no: u32,
    header_line: usize,
    duration_ms: Option<f64>,
    plan: Option<Vec<String>>,
}

impl Block {
    fn plan_text(&self) -> Option<String> {
        let lines = self.plan.as_ref()?;
        let text = lines.join("\n");
        let trimmed = text.trim();
        (!trimmed.is_empty()).then(|| trimmed.to_string())
    }
}

fn header(line: &str) -> Option<&str> {
    QUERY_HEADER
        .captures(line)
        .or_else(|| Q_MARKER.captures(line))
        .map(|c| c.name("n").unwrap().as_str())
}

fn duration_ms(line: &str, line_no: usize) -> Result<Option<f64>> {
    if let Some(c) = PSQL_TIME.captures(line) {
        return non_negative(&c["v"], line_no).map(Some);
    }
    if let Some(c) = MYSQL_TIME.captures(line) {
        return non_negative(&c["v"], line_no).map(|secs| Some(secs * 1000.0));
    }
    Ok(None)
}

/// Parses a TPC-H result file into per-query durations.
pub fn parse_tpch(text: &str) -> Result<TpchRun> {
    let mut blocks: Vec<Block> = Vec::new();
    let mut in_plan = false;

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if let Some(n) = header(line) {
            let query_no: u32 = n.parse().unwrap_or(u32::MAX);
            if !(MIN_QUERY..=MAX_QUERY).contains(&query_no) {
                return Err(Error::malformed(
                    line_no,
                    format!("query number {n} outside {MIN_QUERY}..={MAX_QUERY}"),
                ));
            }
            blocks.push(Block {
                query_no,
                header_line: line_no,
                duration_ms: None,
                plan: None,
            });
            in_plan = false;
            continue;
        }
        let Some(block) = blocks.last_mut() else {
            continue;
        };
        if in_plan {
            if PLAN_END.is_match(line) {
                in_plan = false;
            } else if let Some(plan) = block.plan.as_mut() {
                plan.push(line.to_string());
            }
            continue;
        }
        if PLAN_START.is_match(line) {
            block.plan = Some(Vec::new());
            in_plan = true;
            continue;
        }
        if let Some(ms) = duration_ms(line, line_no)? {
            *block.duration_ms.get_or_insert(0.0) += ms;
        }
    }

    let mut by_query: BTreeMap<u32, QueryResult> = BTreeMap::new();
    for block in &blocks {
        let Some(duration_ms) = block.duration_ms else {
            continue;
        };
        let plan_source = block.plan_text();
        match by_query.get_mut(&block.query_no) {
            Some(existing) if existing.duration_ms != duration_ms => {
                return Err(Error::DuplicateQuery {
                    query_no: block.query_no,
                });
            }
            Some(existing) => {
                if plan_source.is_some() {
                    existing.plan_source = plan_source;
                }
            }
            None => {
                by_query.insert(
                    block.query_no,
                    QueryResult {
                        query_no: block.query_no,
                        duration_ms,
                        plan_source,
                    },
                );
            }
        }
    }

    if by_query.is_empty() {
        let line = blocks.first().map_or(text.lines().count().max(1), |b| b.header_line);
        return Err(Error::malformed(
            line,
            "no query block with a header and a timing line found",
        ));
    }
    Ok(TpchRun {
        results: by_query.into_values().collect(),
    })
}

/// Attaches an `EXPLAIN` capture to a query, replacing any earlier one.
pub fn attach_plan(mut run: TpchRun, query_no: u32, plan_text: &str) -> Result<TpchRun> {
    let idx = run
        .results
        .binary_search_by_key(&query_no, |r| r.query_no)
        .map_err(|_| Error::UnknownQuery { query_no })?;
    run.results[idx].plan_source = Some(plan_text.to_string());
    Ok(run)
}
