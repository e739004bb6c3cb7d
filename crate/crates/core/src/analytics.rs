//! Numbers shown on the dashboard: windowed OLTP averages and the grouped
//! per-query OLAP comparison. All values are linear; log scaling is a
//! rendering concern.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sysbench::{MetricSample, SysbenchRun};
use crate::tpch::TpchRun;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKindOltp {
    Tps,
    Qps,
    Latency,
}

impl MetricKindOltp {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricKindOltp::Tps => "tps",
            MetricKindOltp::Qps => "qps",
            MetricKindOltp::Latency => "latency",
        }
    }

    pub fn value(self, sample: &MetricSample) -> f64 {
        match self {
            MetricKindOltp::Tps => sample.tps,
            MetricKindOltp::Qps => sample.qps,
            MetricKindOltp::Latency => sample.latency,
        }
    }
}

impl fmt::Display for MetricKindOltp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKindOltp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tps" => Ok(MetricKindOltp::Tps),
            "qps" => Ok(MetricKindOltp::Qps),
            "latency" => Ok(MetricKindOltp::Latency),
            other => Err(format!("unknown metric `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowAverages {
    pub tps_avg: f64,
    pub qps_avg: f64,
    pub latency_avg: f64,
    pub sample_count: usize,
    /// Requested window, seconds, inclusive on both ends.
    pub window: [u64; 2],
}

/// Unweighted means over samples with `t_from <= t <= t_to`.
pub fn window_average(run: &SysbenchRun, t_from: u64, t_to: u64) -> Result<WindowAverages> {
    if t_from > t_to {
        return Err(Error::InvertedWindow {
            from: t_from,
            to: t_to,
        });
    }
    // Samples are strictly increasing in t.
    let start = run.samples.partition_point(|s| s.t < t_from);
    let end = run.samples.partition_point(|s| s.t <= t_to);
    let selected = &run.samples[start..end.max(start)];
    if selected.is_empty() {
        return Err(Error::EmptyWindow {
            from: t_from,
            to: t_to,
        });
    }
    let n = selected.len() as f64;
    let mean = |metric: MetricKindOltp| selected.iter().map(|s| metric.value(s)).sum::<f64>() / n;
    Ok(WindowAverages {
        tps_avg: mean(MetricKindOltp::Tps),
        qps_avg: mean(MetricKindOltp::Qps),
        latency_avg: mean(MetricKindOltp::Latency),
        sample_count: selected.len(),
        window: [t_from, t_to],
    })
}

/// Averages over the whole run.
pub fn full_average(run: &SysbenchRun) -> Result<WindowAverages> {
    match (run.samples.first(), run.samples.last()) {
        (Some(first), Some(last)) => window_average(run, first.t, last.t),
        _ => Err(Error::EmptyWindow { from: 0, to: 0 }),
    }
}

/// `(t, value)` pairs of one metric in time order.
pub fn timeseries(run: &SysbenchRun, metric: MetricKindOltp) -> Vec<(u64, f64)> {
    run.samples.iter().map(|s| (s.t, metric.value(s))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDuration {
    pub run: String,
    /// `None` when the run has no result for the query.
    pub duration_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryComparison {
    pub query_no: u32,
    /// One entry per run, in the order of [`TpchComparison::runs`].
    pub durations: Vec<RunDuration>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TpchComparison {
    pub runs: Vec<String>,
    /// Ordered by query number; covers the union of all runs' queries.
    pub per_query: Vec<QueryComparison>,
}

impl TpchComparison {
    pub fn query(&self, query_no: u32) -> Option<&QueryComparison> {
        self.per_query.iter().find(|q| q.query_no == query_no)
    }
}

/// Aligns per-query durations of several runs for grouped bar charts.
pub fn build_comparison(runs: &[(String, TpchRun)]) -> Result<TpchComparison> {
    let mut seen = HashSet::new();
    for (name, _) in runs {
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateRunName(name.clone()));
        }
    }

    let lookups: Vec<BTreeMap<u32, f64>> = runs
        .iter()
        .map(|(_, run)| {
            run.results
                .iter()
                .map(|r| (r.query_no, r.duration_ms))
                .collect()
        })
        .collect();
    let queries: BTreeSet<u32> = lookups.iter().flat_map(|m| m.keys().copied()).collect();

    let per_query = queries
        .into_iter()
        .map(|query_no| QueryComparison {
            query_no,
            durations: runs
                .iter()
                .zip(&lookups)
                .map(|((name, _), lookup)| RunDuration {
                    run: name.clone(),
                    duration_ms: lookup.get(&query_no).copied(),
                })
                .collect(),
        })
        .collect();

    Ok(TpchComparison {
        runs: runs.iter().map(|(name, _)| name.clone()).collect(),
        per_query,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tpch::QueryResult;

    fn run(tps: &[(u64, f64)]) -> SysbenchRun {
        SysbenchRun {
            samples: tps
                .iter()
                .map(|&(t, tps)| MetricSample {
                    t,
                    tps,
                    qps: tps * 2.0,
                    latency: 1.0,
                    errors_per_s: 0.0,
                    detail: None,
                })
                .collect(),
            summary: None,
            latency_percentile: None,
        }
    }

    fn tpch(results: &[(u32, f64)]) -> TpchRun {
        TpchRun {
            results: results
                .iter()
                .map(|&(query_no, duration_ms)| QueryResult {
                    query_no,
                    duration_ms,
                    plan_source: None,
                })
                .collect(),
        }
    }

    #[test]
    fn window_means() {
        let r = run(&[(1, 100.0), (2, 200.0), (3, 300.0)]);
        let all = window_average(&r, 1, 3).unwrap();
        assert_eq!(all.tps_avg, 200.0);
        assert_eq!(all.qps_avg, 400.0);
        assert_eq!(all.sample_count, 3);
        let tail = window_average(&r, 2, 3).unwrap();
        assert_eq!(tail.tps_avg, 250.0);
        assert_eq!(tail.window, [2, 3]);
    }

    #[test]
    fn empty_and_inverted_windows() {
        let r = run(&[(1, 100.0), (2, 200.0), (3, 300.0)]);
        assert_eq!(
            window_average(&r, 10, 20),
            Err(Error::EmptyWindow { from: 10, to: 20 })
        );
        assert_eq!(
            window_average(&r, 3, 1),
            Err(Error::InvertedWindow { from: 3, to: 1 })
        );
    }

    #[test]
    fn point_window_selects_single_sample() {
        let r = run(&[(1, 100.0), (2, 200.0), (3, 300.0)]);
        let w = window_average(&r, 2, 2).unwrap();
        assert_eq!((w.sample_count, w.tps_avg), (1, 200.0));
    }

    #[test]
    fn full_average_cases() {
        assert_eq!(full_average(&run(&[(1, 100.0)])).unwrap().tps_avg, 100.0);
        let flat: Vec<(u64, f64)> = (1..=300).map(|t| (t, 50.0)).collect();
        let flat = run(&flat);
        assert_eq!(full_average(&flat).unwrap().tps_avg, 50.0);
        assert_eq!(
            full_average(&flat).unwrap(),
            window_average(&flat, 1, 300).unwrap()
        );
        assert!(matches!(
            full_average(&run(&[])),
            Err(Error::EmptyWindow { .. })
        ));
    }

    #[test]
    fn timeseries_pairs() {
        let r = run(&[(1, 100.0), (2, 200.0), (3, 300.0)]);
        assert_eq!(
            timeseries(&r, MetricKindOltp::Tps),
            vec![(1, 100.0), (2, 200.0), (3, 300.0)]
        );
        assert_eq!(
            timeseries(&r, MetricKindOltp::Latency),
            vec![(1, 1.0), (2, 1.0), (3, 1.0)]
        );
    }

    #[test]
    fn comparison_direct() {
        let c = build_comparison(&[
            ("A".into(), tpch(&[(1, 10.0)])),
            ("B".into(), tpch(&[(1, 20.0)])),
        ])
        .unwrap();
        assert_eq!(c.runs, ["A", "B"]);
        assert_eq!(
            c.query(1).unwrap().durations,
            vec![
                RunDuration { run: "A".into(), duration_ms: Some(10.0) },
                RunDuration { run: "B".into(), duration_ms: Some(20.0) },
            ]
        );
    }

    #[test]
    fn comparison_union_marks_absent() {
        let c = build_comparison(&[
            ("A".into(), tpch(&[(1, 10.0)])),
            ("B".into(), tpch(&[(2, 20.0)])),
        ])
        .unwrap();
        assert_eq!(c.per_query.len(), 2);
        assert_eq!(c.query(1).unwrap().durations[1].duration_ms, None);
        assert_eq!(c.query(2).unwrap().durations[0].duration_ms, None);
        assert_eq!(c.query(2).unwrap().durations[1].duration_ms, Some(20.0));
    }

    #[test]
    fn comparison_duplicate_names() {
        assert_eq!(
            build_comparison(&[("pg".into(), tpch(&[])), ("pg".into(), tpch(&[]))]),
            Err(Error::DuplicateRunName("pg".into()))
        );
    }

    #[test]
    fn metric_names() {
        assert_eq!("TPS".parse::<MetricKindOltp>(), Ok(MetricKindOltp::Tps));
        assert_eq!("latency".parse::<MetricKindOltp>(), Ok(MetricKindOltp::Latency));
        assert!("p99".parse::<MetricKindOltp>().is_err());
    }
}
