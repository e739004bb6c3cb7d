//! The versioned JSON API.
//!
//! | method | path | success |
//! |---|---|---|
//! | POST | `/v1/runs?kind=sysbench\|tpch` (multipart `file`, optional `name`) | 201 summary |
//! | GET | `/v1/runs` | 200 summaries |
//! | PATCH | `/v1/runs/{id}` `{"name": ...}` | 200 summary |
//! | DELETE | `/v1/runs/{id}` | 204 |
//! | GET | `/v1/runs/{id}/timeseries?metric=tps\|qps\|latency` | 200 |
//! | GET | `/v1/runs/{id}/average?from=&to=` | 200 |
//! | GET | `/v1/tpch/comparison?ids=a,b` | 200 |
//! | POST | `/v1/runs/{id}/queries/{q}/plan` (raw text body) | 204 |
//! | GET | `/v1/runs/{id}/queries/{q}/plan?terminology=&metric=` | 200 |
//!
//! Failures answer `{"error": {"code", "message", "cause"?}}` with 404 for
//! unknown runs, queries and plans, 409 for name clashes and 400 otherwise.

use std::collections::HashMap;
use std::future::Future;
use std::io;
use std::path::Path;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{DefaultBodyLimit, Multipart, Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use crate::error::ServiceError;
use crate::session::{RunKind, RunSummary, Session};

const UPLOAD_LIMIT: usize = 64 * 1024 * 1024;

type Params = Result<Query<HashMap<String, String>>, QueryRejection>;

#[derive(Debug)]
pub struct ApiError(pub ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cause: Option<String>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct ErrorEnvelope {
    pub error: ErrorBody,
}

pub fn status_for(e: &ServiceError) -> StatusCode {
    match e {
        ServiceError::UnknownRun(_)
        | ServiceError::UnknownQuery(_)
        | ServiceError::NoPlanAttached(_) => StatusCode::NOT_FOUND,
        ServiceError::NameTaken { .. } => StatusCode::CONFLICT,
        _ => StatusCode::BAD_REQUEST,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorEnvelope {
            error: ErrorBody {
                code: self.0.code().to_string(),
                message: self.0.to_string(),
                cause: self.0.cause().map(str::to_string),
            },
        };
        (status_for(&self.0), Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn invalid(message: impl Into<String>) -> ApiError {
    ApiError(ServiceError::Validation(message.into()))
}

fn params(query: Params) -> ApiResult<HashMap<String, String>> {
    query.map(|Query(q)| q).map_err(|e| invalid(e.body_text()))
}

fn parse_param<T: std::str::FromStr>(q: &HashMap<String, String>, key: &str) -> ApiResult<Option<T>>
where
    T::Err: std::fmt::Display,
{
    q.get(key)
        .map(|v| v.parse::<T>().map_err(|e| invalid(format!("parameter `{key}`: {e}"))))
        .transpose()
}

fn query_no(raw: &str) -> ApiResult<u32> {
    raw.parse()
        .map_err(|_| invalid(format!("query number `{raw}` is not a positive integer")))
}

/// The API router. With `static_dir`, files under it are served for every
/// path outside `/v1`.
pub fn router(session: Arc<Session>, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/runs", get(list_runs).post(upload_run))
        .route("/runs/{id}", patch(rename_run).delete(delete_run))
        .route("/runs/{id}/timeseries", get(timeseries))
        .route("/runs/{id}/average", get(average))
        .route("/runs/{id}/queries/{q}/plan", get(get_plan).post(attach_plan))
        .route("/tpch/comparison", get(comparison))
        .layer(DefaultBodyLimit::max(UPLOAD_LIMIT));
    let app = Router::new().nest("/v1", api).with_state(session);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

/// Serves `router` until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    router: Router,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> io::Result<()> {
    axum::serve(listener, router)
        .with_graceful_shutdown(shutdown)
        .await
}

async fn list_runs(State(session): State<Arc<Session>>) -> Json<Vec<RunSummary>> {
    Json(session.list_runs())
}

async fn upload_run(
    State(session): State<Arc<Session>>,
    query: Params,
    mut multipart: Multipart,
) -> ApiResult<(StatusCode, Json<RunSummary>)> {
    let q = params(query)?;
    let kind: RunKind = q
        .get("kind")
        .ok_or_else(|| invalid("parameter `kind` is required"))?
        .parse()?;
    let mut name = q.get("name").cloned().unwrap_or_default();
    let mut file: Option<(Option<String>, Bytes)> = None;
    while let Some(field) = multipart
        .next_field()
        .await
        .map_err(|e| invalid(e.body_text()))?
    {
        match field.name() {
            Some("file") => {
                let file_name = field.file_name().map(str::to_string);
                let bytes = field.bytes().await.map_err(|e| invalid(e.body_text()))?;
                file = Some((file_name, bytes));
            }
            Some("name") => name = field.text().await.map_err(|e| invalid(e.body_text()))?,
            _ => {}
        }
    }
    let (file_name, bytes) = file.ok_or_else(|| invalid("multipart field `file` is required"))?;
    let summary = tokio::task::spawn_blocking(move || {
        session.upload_run(kind, &name, file_name.as_deref(), &bytes)
    })
    .await
    .map_err(|e| invalid(format!("upload aborted: {e}")))??;
    Ok((StatusCode::CREATED, Json(summary)))
}

#[derive(Deserialize)]
struct RenameBody {
    name: String,
}

async fn rename_run(
    State(session): State<Arc<Session>>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<RenameBody>, JsonRejection>,
) -> ApiResult<Json<RunSummary>> {
    let Json(body) = body.map_err(|e| invalid(e.body_text()))?;
    Ok(Json(session.rename_run(&id, &body.name)?))
}

async fn delete_run(
    State(session): State<Arc<Session>>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<StatusCode> {
    session.delete_run(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn timeseries(
    State(session): State<Arc<Session>>,
    UrlPath(id): UrlPath<String>,
    query: Params,
) -> ApiResult<impl IntoResponse> {
    let q = params(query)?;
    let metric = parse_param(&q, "metric")?.ok_or_else(|| invalid("parameter `metric` is required"))?;
    Ok(Json(session.get_timeseries(&id, metric)?))
}

async fn average(
    State(session): State<Arc<Session>>,
    UrlPath(id): UrlPath<String>,
    query: Params,
) -> ApiResult<impl IntoResponse> {
    let q = params(query)?;
    let from = parse_param(&q, "from")?;
    let to = parse_param(&q, "to")?;
    Ok(Json(session.get_window_average(&id, from, to)?))
}

async fn comparison(
    State(session): State<Arc<Session>>,
    query: Params,
) -> ApiResult<impl IntoResponse> {
    let q = params(query)?;
    let ids: Vec<String> = q
        .get("ids")
        .map(|ids| {
            ids.split(',')
                .map(str::trim)
                .filter(|id| !id.is_empty())
                .map(str::to_string)
                .collect()
        })
        .unwrap_or_default();
    Ok(Json(session.get_tpch_comparison(&ids)?))
}

async fn attach_plan(
    State(session): State<Arc<Session>>,
    UrlPath((id, q)): UrlPath<(String, String)>,
    body: Bytes,
) -> ApiResult<StatusCode> {
    let query_no = query_no(&q)?;
    let text = std::str::from_utf8(&body).map_err(|_| invalid("plan body is not valid UTF-8"))?;
    session.attach_plan(&id, query_no, text)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn get_plan(
    State(session): State<Arc<Session>>,
    UrlPath((id, q)): UrlPath<(String, String)>,
    query: Params,
) -> ApiResult<impl IntoResponse> {
    let query_no = query_no(&q)?;
    let q = params(query)?;
    let terminology = parse_param(&q, "terminology")?.unwrap_or_default();
    let metric = parse_param(&q, "metric")?.unwrap_or_default();
    Ok(Json(session.get_plan(&id, query_no, terminology, metric)?))
}
