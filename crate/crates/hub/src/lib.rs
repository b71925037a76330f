//! HTTP front end for a [`TaskQueue`].
//!
//! | route | |
//! |---|---|
//! | `GET /api/tasks/next?worker=&kind=pair\|single` | next task, or `204` when none is left |
//! | `POST /api/annotations` | store one rating |
//! | `GET /api/progress` | totals and per-item counts |
//! | `GET /api/items/{id}` | items registered under a pair or face id |
//! | `GET /images/...` | files from the configured image directory |

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use biasbench_core::annotation::{ItemCount, ItemInfo, Progress, SubmitOutcome, Task, TaskQueue};
use biasbench_core::{AnnotationId, AnnotationRecord, Error, RatedAttribute, TaskKind, WorkerId};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

/// Milliseconds since the Unix epoch.
pub type Clock = fn() -> u64;

pub fn system_clock() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Shared state: the queue behind one lock, so assignment and the log
/// writer are serialized.
pub struct Hub {
    queue: Mutex<TaskQueue>,
    clock: Clock,
}

impl Hub {
    pub fn new(queue: TaskQueue) -> Self {
        Self::with_clock(queue, system_clock)
    }

    pub fn with_clock(queue: TaskQueue, clock: Clock) -> Self {
        Self {
            queue: Mutex::new(queue),
            clock,
        }
    }

    fn queue(&self) -> MutexGuard<'_, TaskQueue> {
        self.queue.lock().unwrap_or_else(|p| p.into_inner())
    }

    /// A copy of the stored log.
    pub fn snapshot(&self) -> Vec<AnnotationRecord> {
        self.queue().log().to_vec()
    }
}

/// Error body: `{"kind": ..., "message": ...}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct ApiError {
    pub kind: String,
    pub message: String,
}

struct Failure(StatusCode, ApiError);

impl Failure {
    fn bad_request(kind: &str, message: impl Into<String>) -> Self {
        Failure(
            StatusCode::BAD_REQUEST,
            ApiError {
                kind: kind.into(),
                message: message.into(),
            },
        )
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::ScoreOutOfRange(_) => StatusCode::UNPROCESSABLE_ENTITY,
            Error::UnknownItem(_) => StatusCode::NOT_FOUND,
            Error::UnassignedSubmission { .. } | Error::Inconsistent { .. } => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Failure(
            status,
            ApiError {
                kind: e.kind().into(),
                message: e.to_string(),
            },
        )
    }
}

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

#[derive(Debug, Deserialize)]
struct NextQuery {
    worker: Option<String>,
    kind: Option<String>,
}

pub fn parse_kind(s: &str) -> Option<TaskKind> {
    match s {
        "pair" => Some(TaskKind::PairIdentity),
        "single" => Some(TaskKind::SingleAttribute),
        _ => None,
    }
}

async fn next_task(
    State(hub): State<Arc<Hub>>,
    Query(q): Query<NextQuery>,
) -> Result<Response, Failure> {
    let worker = q.worker.filter(|w| !w.trim().is_empty()).ok_or_else(|| {
        Failure::bad_request("missing_worker", "query parameter `worker` is required")
    })?;
    let kind_text = q.kind.unwrap_or_else(|| "pair".into());
    let kind = parse_kind(&kind_text).ok_or_else(|| {
        Failure::bad_request(
            "unknown_kind",
            format!("unknown task kind `{kind_text}`; expected pair or single"),
        )
    })?;
    let task: Option<Task> = hub.queue().next_task(&WorkerId(worker), kind);
    Ok(match task {
        Some(t) => Json(t).into_response(),
        None => StatusCode::NO_CONTENT.into_response(),
    })
}

/// A rating as posted by a client. The server stamps the time; the id is
/// derived from worker, item and attribute when omitted.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Submission {
    #[serde(default)]
    pub annotation_id: Option<String>,
    /// Inferred from `attribute` when omitted.
    #[serde(default)]
    pub task_kind: Option<TaskKind>,
    pub item_ref: String,
    #[serde(default)]
    pub attribute: Option<RatedAttribute>,
    pub worker_id: String,
    pub score: i64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Ack {
    pub status: SubmitOutcome,
    pub annotation_id: String,
    pub timestamp: u64,
}

async fn submit(
    State(hub): State<Arc<Hub>>,
    Json(s): Json<Submission>,
) -> Result<(StatusCode, Json<Ack>), Failure> {
    let score =
        u8::try_from(s.score).map_err(|_| Failure::from(Error::ScoreOutOfRange(s.score)))?;
    let worker = WorkerId(s.worker_id);
    let task_kind = s.task_kind.unwrap_or(match s.attribute {
        Some(_) => TaskKind::SingleAttribute,
        None => TaskKind::PairIdentity,
    });
    let annotation_id = match s.annotation_id {
        Some(id) => AnnotationId(id),
        None => AnnotationId::derive(&worker, &s.item_ref, s.attribute),
    };
    let mut queue = hub.queue();
    // a resubmission keeps the original timestamp so it compares equal
    let timestamp = queue
        .record(&annotation_id)
        .map(|r| r.timestamp)
        .unwrap_or_else(hub.clock);
    let record = AnnotationRecord {
        annotation_id,
        task_kind,
        item_ref: s.item_ref,
        attribute: s.attribute,
        worker_id: worker,
        score,
        timestamp,
    };
    let outcome = queue.submit(record.clone())?;
    let status = match outcome {
        SubmitOutcome::Accepted => StatusCode::CREATED,
        SubmitOutcome::Duplicate => StatusCode::OK,
    };
    Ok((
        status,
        Json(Ack {
            status: outcome,
            annotation_id: record.annotation_id.0,
            timestamp,
        }),
    ))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProgressReport {
    #[serde(flatten)]
    pub summary: Progress,
    pub per_item: Vec<ItemCount>,
}

async fn progress(State(hub): State<Arc<Hub>>) -> Json<ProgressReport> {
    let q = hub.queue();
    Json(ProgressReport {
        summary: q.progress(),
        per_item: q.item_counts(),
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ItemReport {
    pub item_ref: String,
    pub items: Vec<ItemInfo>,
    /// URL paths under `/images` for every present image ref.
    pub image_urls: Vec<Option<String>>,
}

async fn item(
    State(hub): State<Arc<Hub>>,
    Path(id): Path<String>,
) -> Result<Json<ItemReport>, Failure> {
    let items: Vec<ItemInfo> = hub.queue().items(&id).into_iter().cloned().collect();
    let first = items
        .first()
        .ok_or_else(|| Failure::from(Error::UnknownItem(id.clone())))?;
    let image_urls = first
        .image_refs
        .iter()
        .map(|r| {
            r.as_ref()
                .map(|r| format!("/images/{}", r.trim_start_matches('/')))
        })
        .collect();
    Ok(Json(ItemReport {
        item_ref: id,
        items,
        image_urls,
    }))
}

/// Builds the API router; `/images` is served from `image_dir` when given.
pub fn router(hub: Arc<Hub>, image_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/tasks/next", get(next_task))
        .route("/api/annotations", post(submit))
        .route("/api/progress", get(progress))
        .route("/api/items/{id}", get(item))
        .with_state(hub);
    match image_dir {
        Some(dir) => api.nest_service("/images", ServeDir::new(dir)),
        None => api,
    }
}

/// Serves `router` on `addr` until the process is stopped.
pub async fn serve(
    hub: Arc<Hub>,
    image_dir: Option<PathBuf>,
    addr: SocketAddr,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(hub, image_dir)).await
}
