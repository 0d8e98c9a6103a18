//! Local HTTP service serving reports and collecting ratings.
//!
//! | route | response |
//! |---|---|
//! | `GET /` | report index |
//! | `GET /reports/{stack_id}.html` | one report |
//! | `GET /widget.js` | widget bundle, when present in the report directory |
//! | `GET /api/stacks[?rater=]` | stacks with rated status |
//! | `POST /api/ratings` | store a rating: 201, or 400/422 |
//! | `GET /api/ratings[?rater=]` | stored ratings |

use std::collections::HashSet;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::Mutex;

use crate::ratings::{rated_by, RatingSubmission, RatingsError, RatingsLog};
use crate::report::{is_safe_id, StackEntry, INDEX_FILE, REPORTS_DIR, STACKS_FILE};

pub const WIDGET_FILE: &str = "widget.js";

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("address {0} is already in use")]
    AddressInUse(SocketAddr),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: not a report directory: {message}")]
    NotReportDir { path: PathBuf, message: String },
    #[error("refusing to start: {0}")]
    Ratings(#[from] RatingsError),
}

#[derive(Debug)]
pub struct AppState {
    root: PathBuf,
    stacks: Vec<StackEntry>,
    known: HashSet<String>,
    log: Mutex<RatingsLog>,
}

impl AppState {
    /// Loads the stack list of a rendered bundle and opens the ratings log.
    pub fn open(report_dir: &Path, ratings_path: &Path) -> Result<Self, ServiceError> {
        let sp = report_dir.join(STACKS_FILE);
        let text = std::fs::read_to_string(&sp).map_err(|source| ServiceError::Io { path: sp.clone(), source })?;
        let stacks: Vec<StackEntry> =
            serde_json::from_str(&text).map_err(|e| ServiceError::NotReportDir { path: sp.clone(), message: e.to_string() })?;
        let known = stacks.iter().map(|s| s.stack_id.clone()).collect();
        let log = RatingsLog::open(ratings_path)?;
        Ok(Self { root: report_dir.to_path_buf(), stacks, known, log: Mutex::new(log) })
    }
}

/// Builds the router for a report directory and ratings log.
pub fn app(report_dir: &Path, ratings_path: &Path) -> Result<Router, ServiceError> {
    Ok(router(Arc::new(AppState::open(report_dir, ratings_path)?)))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/reports/{file}", get(report))
        .route("/widget.js", get(widget))
        .route("/api/stacks", get(list_stacks))
        .route("/api/ratings", get(list_ratings).post(post_rating))
        .with_state(state)
}

/// Binds `addr` and serves until interrupted.
pub async fn serve(report_dir: &Path, ratings_path: &Path, addr: SocketAddr) -> Result<(), ServiceError> {
    let app = app(report_dir, ratings_path)?;
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| match e.kind() {
        std::io::ErrorKind::AddrInUse => ServiceError::AddressInUse(addr),
        _ => ServiceError::Io { path: PathBuf::from(addr.to_string()), source: e },
    })?;
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|source| ServiceError::Io { path: PathBuf::from(addr.to_string()), source })
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(serde_json::json!({ "error": message.into() }))).into_response()
}

async fn file(path: PathBuf, content_type: &'static str) -> Response {
    match tokio::fs::read(&path).await {
        Ok(bytes) => ([(header::CONTENT_TYPE, content_type)], bytes).into_response(),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => error(StatusCode::NOT_FOUND, "not found"),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn index(State(s): State<Arc<AppState>>) -> Response {
    file(s.root.join(INDEX_FILE), "text/html; charset=utf-8").await
}

async fn widget(State(s): State<Arc<AppState>>) -> Response {
    file(s.root.join(WIDGET_FILE), "text/javascript; charset=utf-8").await
}

async fn report(State(s): State<Arc<AppState>>, UrlPath(name): UrlPath<String>) -> Response {
    match name.strip_suffix(".html") {
        Some(id) if is_safe_id(id) && s.known.contains(id) => file(s.root.join(REPORTS_DIR).join(&name), "text/html; charset=utf-8").await,
        _ => error(StatusCode::NOT_FOUND, "unknown report"),
    }
}

#[derive(Debug, Deserialize)]
struct RaterQuery {
    rater: Option<String>,
}

#[derive(Debug, Serialize)]
struct StackStatus<'a> {
    #[serde(flatten)]
    entry: &'a StackEntry,
    rated: bool,
    n_ratings: usize,
}

async fn list_stacks(State(s): State<Arc<AppState>>, Query(q): Query<RaterQuery>) -> Response {
    let log = s.log.lock().await;
    let counts = rated_by(log.records(), q.rater.as_deref());
    let out: Vec<StackStatus> = s
        .stacks
        .iter()
        .map(|entry| {
            let n = counts.get(&entry.stack_id).copied().unwrap_or(0);
            StackStatus { entry, rated: n > 0, n_ratings: n }
        })
        .collect();
    Json(out).into_response()
}

async fn list_ratings(State(s): State<Arc<AppState>>, Query(q): Query<RaterQuery>) -> Response {
    let log = s.log.lock().await;
    let out: Vec<_> = log.records().iter().filter(|r| q.rater.as_deref().is_none_or(|x| x == r.rater_id)).collect();
    Json(out).into_response()
}

async fn post_rating(State(s): State<Arc<AppState>>, body: Bytes) -> Response {
    let sub: RatingSubmission = match serde_json::from_slice(&body) {
        Ok(v) => v,
        Err(e) if e.is_syntax() || e.is_eof() => return error(StatusCode::BAD_REQUEST, e.to_string()),
        Err(e) => return error(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
    };
    if let Err(e) = sub.validate() {
        return error(StatusCode::UNPROCESSABLE_ENTITY, e.to_string());
    }
    if !s.known.contains(&sub.stack_id) {
        return error(StatusCode::UNPROCESSABLE_ENTITY, format!("unknown stack_id `{}`", sub.stack_id));
    }
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0);
    let mut log = s.log.lock().await;
    match log.append(sub, now) {
        Ok(rec) => (StatusCode::CREATED, Json(rec)).into_response(),
        Err(RatingsError::Invalid(m)) => error(StatusCode::UNPROCESSABLE_ENTITY, m),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}
