//! In-memory registry of uploaded runs.
//!
//! Writers are serialized by a single `RwLock`; readers share it. File bytes
//! are parsed before the lock is taken, so a slow upload never blocks other
//! requests.

use std::fs;
use std::io;
use std::path::Path;
use std::sync::{PoisonError, RwLock, RwLockReadGuard, RwLockWriteGuard};

use benchvis_core::analytics::{
    build_comparison, full_average, timeseries, window_average, MetricKindOltp, TpchComparison,
    WindowAverages,
};
use benchvis_core::normalize::{plan_view, MetricKindPlan, PlanView, Terminology};
use benchvis_core::sysbench::{parse_sysbench, SysbenchRun};
use benchvis_core::tpch::{attach_plan, parse_tpch, TpchRun};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::error::{ServiceError, ServiceResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunKind {
    Sysbench,
    Tpch,
}

impl RunKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RunKind::Sysbench => "sysbench",
            RunKind::Tpch => "tpch",
        }
    }
}

impl std::str::FromStr for RunKind {
    type Err = ServiceError;

    fn from_str(s: &str) -> ServiceResult<Self> {
        match s {
            "sysbench" => Ok(RunKind::Sysbench),
            "tpch" => Ok(RunKind::Tpch),
            other => Err(ServiceError::Validation(format!(
                "unknown kind `{other}`, expected sysbench or tpch"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "lowercase")]
pub enum RunPayload {
    Sysbench(SysbenchRun),
    Tpch(TpchRun),
}

impl RunPayload {
    pub fn kind(&self) -> RunKind {
        match self {
            RunPayload::Sysbench(_) => RunKind::Sysbench,
            RunPayload::Tpch(_) => RunKind::Tpch,
        }
    }

    /// Parses uploaded bytes with the parser for `kind`.
    pub fn parse(kind: RunKind, bytes: &[u8]) -> ServiceResult<Self> {
        if bytes.is_empty() {
            return Err(ServiceError::Validation("uploaded file is empty".into()));
        }
        let text = std::str::from_utf8(bytes).map_err(|e| {
            ServiceError::Parser(benchvis_core::Error::MalformedInput {
                line: 1 + bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count(),
                reason: "file is not valid UTF-8".into(),
            })
        })?;
        Ok(match kind {
            RunKind::Sysbench => RunPayload::Sysbench(parse_sysbench(text)?),
            RunKind::Tpch => RunPayload::Tpch(parse_tpch(text)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub id: String,
    pub display_name: String,
    pub uploaded_at: DateTime<Utc>,
    pub payload: RunPayload,
}

impl RunRecord {
    pub fn kind(&self) -> RunKind {
        self.payload.kind()
    }

    pub fn summary(&self) -> RunSummary {
        let (samples, queries, plans) = match &self.payload {
            RunPayload::Sysbench(run) => (Some(run.samples.len()), None, None),
            RunPayload::Tpch(run) => (
                None,
                Some(run.query_numbers().collect()),
                Some(
                    run.results
                        .iter()
                        .filter(|r| r.plan_source.is_some())
                        .map(|r| r.query_no)
                        .collect(),
                ),
            ),
        };
        RunSummary {
            id: self.id.clone(),
            name: self.display_name.clone(),
            kind: self.kind(),
            uploaded_at: self.uploaded_at,
            samples,
            queries,
            plans,
        }
    }
}

/// A run without its payload, as listed to clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub id: String,
    pub name: String,
    pub kind: RunKind,
    pub uploaded_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queries: Option<Vec<u32>>,
    /// Queries that have a plan attached.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plans: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub t: u64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub id: String,
    pub metric: MetricKindOltp,
    pub points: Vec<SeriesPoint>,
}

#[derive(Serialize, Deserialize)]
struct SnapshotFile {
    version: u32,
    runs: Vec<RunRecord>,
}

const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Default)]
pub struct Session {
    runs: RwLock<Vec<RunRecord>>,
}

impl Session {
    pub fn new() -> Self {
        Self::default()
    }

    fn read(&self) -> RwLockReadGuard<'_, Vec<RunRecord>> {
        self.runs.read().unwrap_or_else(PoisonError::into_inner)
    }

    fn write(&self) -> RwLockWriteGuard<'_, Vec<RunRecord>> {
        self.runs.write().unwrap_or_else(PoisonError::into_inner)
    }

    /// Parses and registers a run. An empty `name` falls back to
    /// `file_name`.
    pub fn upload_run(
        &self,
        kind: RunKind,
        name: &str,
        file_name: Option<&str>,
        bytes: &[u8],
    ) -> ServiceResult<RunSummary> {
        let name = match (name.trim(), file_name.map(str::trim)) {
            (n, _) if !n.is_empty() => n.to_string(),
            (_, Some(f)) if !f.is_empty() => f.to_string(),
            _ => return Err(ServiceError::Validation("a run name is required".into())),
        };
        let payload = RunPayload::parse(kind, bytes)?;
        self.insert(name, payload)
    }

    /// Registers an already parsed run.
    pub fn insert(&self, name: String, payload: RunPayload) -> ServiceResult<RunSummary> {
        let record = RunRecord {
            id: Uuid::new_v4().simple().to_string(),
            display_name: name,
            uploaded_at: Utc::now(),
            payload,
        };
        let mut runs = self.write();
        ensure_name_free(&runs, record.kind(), &record.display_name, None)?;
        let summary = record.summary();
        runs.push(record);
        Ok(summary)
    }

    pub fn rename_run(&self, id: &str, new_name: &str) -> ServiceResult<RunSummary> {
        let new_name = new_name.trim();
        if new_name.is_empty() {
            return Err(ServiceError::Validation("a run name is required".into()));
        }
        let mut runs = self.write();
        let idx = position(&runs, id)?;
        ensure_name_free(&runs, runs[idx].kind(), new_name, Some(id))?;
        runs[idx].display_name = new_name.to_string();
        Ok(runs[idx].summary())
    }

    pub fn delete_run(&self, id: &str) -> ServiceResult<()> {
        let mut runs = self.write();
        let idx = position(&runs, id)?;
        runs.remove(idx);
        Ok(())
    }

    /// Summaries in upload order.
    pub fn list_runs(&self) -> Vec<RunSummary> {
        self.read().iter().map(RunRecord::summary).collect()
    }

    pub fn get_run(&self, id: &str) -> ServiceResult<RunRecord> {
        let runs = self.read();
        Ok(runs[position(&runs, id)?].clone())
    }

    fn sysbench(&self, id: &str) -> ServiceResult<SysbenchRun> {
        match self.get_run(id)?.payload {
            RunPayload::Sysbench(run) => Ok(run),
            RunPayload::Tpch(_) => Err(wrong_kind(id, RunKind::Sysbench, RunKind::Tpch)),
        }
    }

    fn tpch(&self, id: &str) -> ServiceResult<(String, TpchRun)> {
        let record = self.get_run(id)?;
        match record.payload {
            RunPayload::Tpch(run) => Ok((record.display_name, run)),
            RunPayload::Sysbench(_) => Err(wrong_kind(id, RunKind::Tpch, RunKind::Sysbench)),
        }
    }

    pub fn get_timeseries(&self, id: &str, metric: MetricKindOltp) -> ServiceResult<TimeSeries> {
        let run = self.sysbench(id)?;
        Ok(TimeSeries {
            id: id.to_string(),
            metric,
            points: timeseries(&run, metric)
                .into_iter()
                .map(|(t, value)| SeriesPoint { t, value })
                .collect(),
        })
    }

    /// Averages over `[t_from, t_to]`; a missing bound extends to the end of
    /// the run on that side.
    pub fn get_window_average(
        &self,
        id: &str,
        t_from: Option<u64>,
        t_to: Option<u64>,
    ) -> ServiceResult<WindowAverages> {
        let run = self.sysbench(id)?;
        let averages = match (t_from, t_to) {
            (None, None) => full_average(&run)?,
            (from, to) => {
                let first = run.samples.first().map_or(0, |s| s.t);
                let last = run.samples.last().map_or(0, |s| s.t);
                window_average(&run, from.unwrap_or(first), to.unwrap_or(last))?
            }
        };
        Ok(averages)
    }

    pub fn get_tpch_comparison(&self, ids: &[String]) -> ServiceResult<TpchComparison> {
        if ids.is_empty() {
            return Err(ServiceError::Validation("at least one run id is required".into()));
        }
        let mut runs = Vec::with_capacity(ids.len());
        for id in ids {
            if runs.iter().any(|(seen, _, _): &(&String, String, TpchRun)| *seen == id) {
                return Err(ServiceError::Validation(format!("run `{id}` is listed twice")));
            }
            let (name, run) = self.tpch(id)?;
            runs.push((id, name, run));
        }
        let named: Vec<(String, TpchRun)> = runs.into_iter().map(|(_, n, r)| (n, r)).collect();
        Ok(build_comparison(&named)?)
    }

    pub fn attach_plan(&self, id: &str, query_no: u32, plan_text: &str) -> ServiceResult<()> {
        if plan_text.trim().is_empty() {
            return Err(ServiceError::Validation("plan body is empty".into()));
        }
        let mut runs = self.write();
        let idx = position(&runs, id)?;
        let record = &mut runs[idx];
        let RunPayload::Tpch(run) = &record.payload else {
            return Err(wrong_kind(id, RunKind::Tpch, RunKind::Sysbench));
        };
        let updated = attach_plan(run.clone(), query_no, plan_text)?;
        record.payload = RunPayload::Tpch(updated);
        Ok(())
    }

    pub fn get_plan(
        &self,
        id: &str,
        query_no: u32,
        terminology: Terminology,
        metric: MetricKindPlan,
    ) -> ServiceResult<PlanView> {
        let (_, run) = self.tpch(id)?;
        let result = run.get(query_no).ok_or(ServiceError::UnknownQuery(query_no))?;
        let capture = result
            .plan_source
            .as_deref()
            .ok_or(ServiceError::NoPlanAttached(query_no))?;
        Ok(plan_view(capture, None, terminology, metric)?)
    }

    /// Writes every run to `path` as one JSON document.
    pub fn save_snapshot(&self, path: &Path) -> io::Result<()> {
        let snapshot = SnapshotFile {
            version: SNAPSHOT_VERSION,
            runs: self.read().clone(),
        };
        let json = serde_json::to_vec_pretty(&snapshot).map_err(io::Error::other)?;
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, json)?;
        fs::rename(&tmp, path)
    }

    pub fn load_snapshot(path: &Path) -> io::Result<Session> {
        let bytes = fs::read(path)?;
        let snapshot: SnapshotFile = serde_json::from_slice(&bytes)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        if snapshot.version != SNAPSHOT_VERSION {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("unsupported snapshot version {}", snapshot.version),
            ));
        }
        let mut runs: Vec<RunRecord> = Vec::with_capacity(snapshot.runs.len());
        for record in snapshot.runs {
            let clash = runs.iter().any(|r| {
                r.id == record.id
                    || (r.kind() == record.kind() && r.display_name == record.display_name)
            });
            if clash {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("snapshot repeats run `{}`", record.id),
                ));
            }
            runs.push(record);
        }
        Ok(Session {
            runs: RwLock::new(runs),
        })
    }
}

fn position(runs: &[RunRecord], id: &str) -> ServiceResult<usize> {
    runs.iter()
        .position(|r| r.id == id)
        .ok_or_else(|| ServiceError::UnknownRun(id.to_string()))
}

fn ensure_name_free(
    runs: &[RunRecord],
    kind: RunKind,
    name: &str,
    except_id: Option<&str>,
) -> ServiceResult<()> {
    let taken = runs.iter().any(|r| {
        r.kind() == kind && r.display_name == name && Some(r.id.as_str()) != except_id
    });
    if taken {
        Err(ServiceError::NameTaken {
            kind: kind.as_str(),
            name: name.to_string(),
        })
    } else {
        Ok(())
    }
}

fn wrong_kind(id: &str, expected: RunKind, actual: RunKind) -> ServiceError {
    ServiceError::WrongKind {
        id: id.to_string(),
        expected: expected.as_str(),
        actual: actual.as_str(),
    }
}
