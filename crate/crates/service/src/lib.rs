//! HTTP backend for the previsualize → freeze → mine loop.
//!
//! The transaction database is loaded once and shared read-only. Previews
//! derive sequences on request and never touch shared state. Mining jobs go
//! through a bounded queue to a single worker, so at most one mining run
//! executes at a time while previews keep being served.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::mpsc;
use tower_http::services::ServeDir;

use seqmine_core::ingest::TransactionDb;
use seqmine_core::{
    derive_sequence_db, load_transactions, preview_sample, Algorithm, MinSupport, Miner, MiningConfig, MiningResult,
    TimeWindow,
};

/// Jobs that may wait behind the running one.
pub const QUEUE_DEPTH: usize = 4;
const DEFAULT_PREVIEW_K: usize = 10;

const PLACEHOLDER_INDEX: &str = "<!doctype html><title>seqmine</title>\
<p>The analyst console bundle is not installed. Start the server with <code>--ui &lt;dir&gt;</code> \
or use the JSON API under <code>/api</code>.</p>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Pending,
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone)]
pub struct MiningJob {
    pub id: String,
    pub state: JobState,
    pub window: TimeWindow,
    pub config: MiningConfig,
    pub algorithm: Algorithm,
    /// Serialized once on completion; never changes afterwards.
    pub result: Option<Arc<str>>,
    pub result_csv: Option<Arc<str>>,
    pub error: Option<String>,
}

impl MiningJob {
    fn status(&self) -> serde_json::Value {
        json!({
            "job_id": self.id,
            "state": self.state,
            "window": self.window,
            "config": self.config,
            "algorithm": self.algorithm,
            "error": self.error,
        })
    }

    fn advance(&mut self, next: JobState) {
        let allowed = matches!(
            (self.state, next),
            (JobState::Pending, JobState::Running) | (JobState::Running, JobState::Done | JobState::Failed)
        );
        assert!(allowed, "illegal job transition {:?} -> {:?}", self.state, next);
        self.state = next;
    }
}

#[derive(Debug, Clone)]
pub struct AppState {
    db: Arc<TransactionDb>,
    jobs: Arc<Mutex<HashMap<String, MiningJob>>>,
    next_id: Arc<AtomicU64>,
    queue: mpsc::Sender<String>,
}

/// Receiving end of the job queue; drive it with [`run_worker`].
#[derive(Debug)]
pub struct JobQueue {
    state: AppState,
    rx: mpsc::Receiver<String>,
}

#[derive(Debug)]
struct ApiError(StatusCode, String);

impl ApiError {
    fn bad_request(msg: impl Into<String>) -> Self {
        Self(StatusCode::BAD_REQUEST, msg.into())
    }

    fn not_found(id: &str) -> Self {
        Self(StatusCode::NOT_FOUND, format!("unknown job {id}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_window(start: &str, end: &str) -> ApiResult<TimeWindow> {
    TimeWindow::parse(start, end).map_err(|e| ApiError::bad_request(e.to_string()))
}

/// Builds the router plus the unstarted job queue.
pub fn app_with_queue(db: TransactionDb, ui_dir: Option<&Path>) -> (Router, JobQueue) {
    let (tx, rx) = mpsc::channel(QUEUE_DEPTH);
    let state = AppState {
        db: Arc::new(db),
        jobs: Arc::default(),
        next_id: Arc::new(AtomicU64::new(1)),
        queue: tx,
    };
    let api = Router::new()
        .route("/api/stats", get(stats))
        .route("/api/preview", get(preview))
        .route("/api/mine", post(submit_mine))
        .route("/api/jobs/:id", get(job_status))
        .route("/api/results/:id", get(job_result))
        .route("/api/results/:id/csv", get(job_result_csv))
        .with_state(state.clone());
    let router = match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(PLACEHOLDER_INDEX) })),
    };
    (router, JobQueue { state, rx })
}

/// Router with its mining worker running on the current Tokio runtime.
pub fn app(db: TransactionDb, ui_dir: Option<&Path>) -> Router {
    let (router, queue) = app_with_queue(db, ui_dir);
    tokio::spawn(run_worker(queue));
    router
}

/// Executes queued jobs one at a time until every sender is gone.
pub async fn run_worker(mut queue: JobQueue) {
    while let Some(id) = queue.rx.recv().await {
        let state = &queue.state;
        let queued = {
            let mut jobs = state.jobs.lock().expect("job table");
            let Some(job) = jobs.get_mut(&id) else { continue };
            job.advance(JobState::Running);
            (job.window, job.config, job.algorithm)
        };
        let db = Arc::clone(&state.db);
        let outcome = tokio::task::spawn_blocking(move || {
            let (window, config, algorithm) = queued;
            let sequences = derive_sequence_db(&db, window);
            let result = algorithm.mine(&sequences, &config)?;
            render(&result)
        })
        .await;
        let mut jobs = state.jobs.lock().expect("job table");
        let job = jobs.get_mut(&id).expect("job exists");
        match outcome {
            Ok(Ok((body, csv))) => {
                job.result = Some(body.into());
                job.result_csv = Some(csv.into());
                job.advance(JobState::Done);
                tracing::info!(job = %id, "mining job done");
            }
            Ok(Err(e)) => {
                job.error = Some(e.to_string());
                job.advance(JobState::Failed);
            }
            Err(panic) => {
                job.error = Some(format!("mining task aborted: {panic}"));
                job.advance(JobState::Failed);
            }
        }
    }
}

fn render(result: &MiningResult) -> seqmine_core::Result<(String, String)> {
    let body = serde_json::to_string(&result.to_json())?;
    let mut csv = Vec::new();
    result.write_csv(&mut csv)?;
    Ok((body, String::from_utf8(csv).expect("csv is utf-8")))
}

async fn stats(State(state): State<AppState>) -> Json<serde_json::Value> {
    let db = &state.db;
    let span = db.time_span().map(|w| [w.start(), w.end()]);
    Json(json!({
        "objects": db.object_universe().len(),
        "records": db.len(),
        "items": db.item_universe().len(),
        "time_span": span,
    }))
}

#[derive(Debug, Deserialize)]
struct PreviewQuery {
    start: String,
    end: String,
    k: Option<usize>,
}

async fn preview(State(state): State<AppState>, Query(q): Query<PreviewQuery>) -> ApiResult<Json<serde_json::Value>> {
    let window = parse_window(&q.start, &q.end)?;
    let k = q.k.unwrap_or(DEFAULT_PREVIEW_K);
    if k == 0 {
        return Err(ApiError::bad_request("k must be at least 1"));
    }
    let db = Arc::clone(&state.db);
    let report = tokio::task::spawn_blocking(move || preview_sample(&db, window, k))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    let mut body = serde_json::to_value(&report).expect("report serializes");
    body["interval_days"] = report.stats.interval_days.into();
    Ok(Json(body))
}

#[derive(Debug, Deserialize)]
struct MineRequest {
    start: String,
    end: String,
    min_support: f64,
    max_len: Option<usize>,
    #[serde(default = "default_algorithm")]
    algorithm: String,
}

fn default_algorithm() -> String {
    "rsp".to_owned()
}

/// A whole number is an object count; a value in (0, 1) a fraction.
fn min_support_from(value: f64) -> ApiResult<MinSupport> {
    if value >= 1.0 && value.fract() == 0.0 && value <= f64::from(u32::MAX) {
        Ok(MinSupport::Absolute(value as u32))
    } else if value > 0.0 && value < 1.0 {
        Ok(MinSupport::Fraction(value))
    } else {
        Err(ApiError::bad_request(format!(
            "min_support must be a whole count >= 1 or a fraction in (0, 1), got {value}"
        )))
    }
}

async fn submit_mine(State(state): State<AppState>, Json(req): Json<MineRequest>) -> ApiResult<Response> {
    let window = parse_window(&req.start, &req.end)?;
    let algorithm: Algorithm = req
        .algorithm
        .parse()
        .map_err(|e: seqmine_core::Error| ApiError::bad_request(e.to_string()))?;
    if algorithm == Algorithm::Naive {
        return Err(ApiError::bad_request("algorithm must be rsp or gsp"));
    }
    let config = MiningConfig::new(min_support_from(req.min_support)?).with_max_len(req.max_len);
    config.validate().map_err(|e| ApiError::bad_request(e.to_string()))?;

    let id = state.next_id.fetch_add(1, Ordering::Relaxed).to_string();
    state.jobs.lock().expect("job table").insert(
        id.clone(),
        MiningJob {
            id: id.clone(),
            state: JobState::Pending,
            window,
            config,
            algorithm,
            result: None,
            result_csv: None,
            error: None,
        },
    );
    if state.queue.try_send(id.clone()).is_err() {
        state.jobs.lock().expect("job table").remove(&id);
        return Err(ApiError(
            StatusCode::TOO_MANY_REQUESTS,
            format!("job queue is full ({QUEUE_DEPTH} waiting)"),
        ));
    }
    Ok((StatusCode::ACCEPTED, Json(json!({ "job_id": id }))).into_response())
}

fn with_job<T>(state: &AppState, id: &str, f: impl FnOnce(&MiningJob) -> ApiResult<T>) -> ApiResult<T> {
    let jobs = state.jobs.lock().expect("job table");
    let job = jobs.get(id).ok_or_else(|| ApiError::not_found(id))?;
    f(job)
}

fn not_done(job: &MiningJob) -> ApiError {
    let mut msg = format!("job {} is {:?}", job.id, job.state).to_lowercase();
    if let Some(e) = &job.error {
        msg.push_str(": ");
        msg.push_str(e);
    }
    ApiError(StatusCode::CONFLICT, msg)
}

async fn job_status(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<serde_json::Value>> {
    with_job(&state, &id, |job| Ok(Json(job.status())))
}

async fn job_result(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let body = with_job(&state, &id, |job| job.result.clone().ok_or_else(|| not_done(job)))?;
    Ok(([(header::CONTENT_TYPE, "application/json")], body.to_string()).into_response())
}

async fn job_result_csv(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let body = with_job(&state, &id, |job| job.result_csv.clone().ok_or_else(|| not_done(job)))?;
    Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], body.to_string()).into_response())
}

#[derive(Debug)]
pub struct ServeOptions {
    pub data: PathBuf,
    pub bind: SocketAddr,
    pub ui_dir: Option<PathBuf>,
}

/// Loads the dataset and serves until the process is stopped.
pub async fn serve(opts: ServeOptions) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let file = std::fs::File::open(&opts.data).map_err(|e| format!("cannot open {}: {e}", opts.data.display()))?;
    let db = load_transactions(std::io::BufReader::new(file))?;
    tracing::info!(
        records = db.len(),
        objects = db.object_universe().len(),
        "dataset loaded"
    );
    let router = app(db, opts.ui_dir.as_deref());
    let listener = tokio::net::TcpListener::bind(opts.bind).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router).await?;
    Ok(())
}
