//! sysbench OLTP output parsing.
//!
//! Intermediate reports are one line per reporting interval:
//!
//! ```text
//! [ 10s ] thds: 8 tps: 1532.97 qps: 30690.40 (r/w/o: 21480.28/6133.88/3076.24) lat (ms,95%): 7.84 err/s: 0.00 reconn/s: 0.00
//! ```
//!
//! The final report is recognized from its `transactions:`, `queries:`,
//! `total time:` and `Latency (ms)` / `avg:` fields. Every other line is
//! ignored so captures with surrounding shell noise still parse.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::non_negative;

/// One intermediate report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    /// Seconds since the start of the run.
    pub t: u64,
    pub tps: f64,
    pub qps: f64,
    /// Latency in milliseconds at the percentile reported by the line.
    pub latency: f64,
    pub errors_per_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<SampleDetail>,
}

/// Per-sample values that are kept but not charted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleDetail {
    pub threads: u32,
    pub read_qps: f64,
    pub write_qps: f64,
    pub other_qps: f64,
    pub reconnects_per_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SysbenchSummary {
    pub total_transactions: u64,
    pub total_queries: u64,
    pub avg_tps: f64,
    pub avg_qps: f64,
    pub avg_latency: f64,
    pub total_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SysbenchRun {
    pub samples: Vec<MetricSample>,
    pub summary: Option<SysbenchSummary>,
    /// Percentile of the per-sample latency column, e.g. `95`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_percentile: Option<u32>,
}

static INTERMEDIATE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(concat!(
        r"^\s*\[\s*(?P<t>\d+)s\s*\]\s+",
        r"thds:\s*(?P<thds>\S+)\s+",
        r"tps:\s*(?P<tps>\S+)\s+",
        r"qps:\s*(?P<qps>\S+)\s+",
        r"\(\s*r/w/o:\s*(?P<r>[^/\s]+)/(?P<w>[^/\s]+)/(?P<o>[^)\s]+)\s*\)\s+",
        r"lat\s+\(ms,\s*(?P<pct>\d+)%\):\s*(?P<lat>\S+)\s+",
        r"err/s:\s*(?P<err>\S+)\s+",
        r"reconn/s:\s*(?P<reconn>\S+)\s*$",
    ))
    .unwrap()
});

static TRANSACTIONS: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^\s*transactions:\s+(?P<n>\d+)\s+\(\s*(?P<rate>\S+)\s+per sec\.\s*\)").unwrap()
});
static QUERIES: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^\s*queries:\s+(?P<n>\d+)\s+\(\s*(?P<rate>\S+)\s+per sec\.\s*\)").unwrap()
});
static TOTAL_TIME: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*total time:\s+(?P<secs>\S+?)s\s*$").unwrap());
static LATENCY_AVG: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*avg:\s+(?P<ms>\S+)\s*$").unwrap());

#[derive(Default)]
struct SummaryFields {
    transactions: Option<(u64, f64)>,
    queries: Option<(u64, f64)>,
    total_time: Option<f64>,
    avg_latency: Option<f64>,
}

impl SummaryFields {
    fn complete(&self) -> Option<SysbenchSummary> {
        let (total_transactions, avg_tps) = self.transactions?;
        let (total_queries, avg_qps) = self.queries?;
        Some(SysbenchSummary {
            total_transactions,
            total_queries,
            avg_tps,
            avg_qps,
            avg_latency: self.avg_latency?,
            total_time: self.total_time?,
        })
    }
}

fn count(token: &str, line: usize) -> Result<u64> {
    token.parse().map_err(|_| Error::NumericOverflow {
        line,
        token: token.to_string(),
    })
}

fn parse_sample(caps: &regex::Captures<'_>, line: usize) -> Result<MetricSample> {
    let num = |name: &str| non_negative(&caps[name], line);
    let threads = caps["thds"].parse().map_err(|_| Error::NumericOverflow {
        line,
        token: caps["thds"].to_string(),
    })?;
    Ok(MetricSample {
        t: count(&caps["t"], line)?,
        tps: num("tps")?,
        qps: num("qps")?,
        latency: num("lat")?,
        errors_per_s: num("err")?,
        detail: Some(SampleDetail {
            threads,
            read_qps: num("r")?,
            write_qps: num("w")?,
            other_qps: num("o")?,
            reconnects_per_s: num("reconn")?,
        }),
    })
}

/// Parses the complete stdout of a sysbench run.
pub fn parse_sysbench(text: &str) -> Result<SysbenchRun> {
    let mut samples: Vec<MetricSample> = Vec::new();
    let mut latency_percentile = None;
    let mut fields = SummaryFields::default();
    let mut in_latency_block = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        if let Some(caps) = INTERMEDIATE.captures(raw) {
            let sample = parse_sample(&caps, line_no)?;
            if sample.t == 0 {
                return Err(Error::malformed(line_no, "report timestamp must be positive"));
            }
            if let Some(prev) = samples.last() {
                if sample.t <= prev.t {
                    return Err(Error::malformed(
                        line_no,
                        format!("timestamp {}s does not advance past {}s", sample.t, prev.t),
                    ));
                }
            }
            latency_percentile.get_or_insert_with(|| caps["pct"].parse().unwrap_or(95));
            samples.push(sample);
            continue;
        }

        let trimmed = raw.trim();
        if trimmed.is_empty() {
            in_latency_block = false;
            continue;
        }
        if trimmed.starts_with("Latency (ms)") {
            in_latency_block = true;
            continue;
        }
        if trimmed.ends_with("statistics:") {
            in_latency_block = false;
        }

        if let Some(caps) = TRANSACTIONS.captures(raw) {
            fields.transactions = Some((
                count(&caps["n"], line_no)?,
                non_negative(&caps["rate"], line_no)?,
            ));
        } else if let Some(caps) = QUERIES.captures(raw) {
            fields.queries = Some((
                count(&caps["n"], line_no)?,
                non_negative(&caps["rate"], line_no)?,
            ));
        } else if let Some(caps) = TOTAL_TIME.captures(raw) {
            fields.total_time = Some(non_negative(&caps["secs"], line_no)?);
        } else if in_latency_block {
            if let Some(caps) = LATENCY_AVG.captures(raw) {
                fields.avg_latency = Some(non_negative(&caps["ms"], line_no)?);
            }
        }
    }

    let summary = fields.complete();
    if samples.is_empty() && summary.is_none() {
        return Err(Error::malformed(
            text.lines().count().max(1),
            "no sysbench intermediate reports or final report found",
        ));
    }
    Ok(SysbenchRun {
        samples,
        summary,
        latency_percentile,
    })
}
