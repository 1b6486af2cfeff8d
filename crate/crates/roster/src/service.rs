//! HTTP API under `/v1`: instances, jobs, NDJSON progress streams, results
//! and change requests. Jobs run one at a time per worker through a FIFO
//! queue.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Body;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream;
use roster_core::extensions::{apply_changes, ChangeRequest};
use roster_core::hybrid::{HybridConfig, ProgressEvent};
use roster_core::model::{generate_instance, validate_instance, GeneratorConfig, ObjectiveWeights};
use roster_core::RosterInstance;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::{mpsc, watch};

use crate::clock::CancellableClock;
use crate::jobs::{execute, JobRecord, JobSpec, JobState, Store, StoreError, StreamRecord, Task};

#[derive(Debug)]
pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let code = match e {
            StoreError::NotFound(_) => StatusCode::NOT_FOUND,
            StoreError::IllegalTransition { .. } => StatusCode::CONFLICT,
            StoreError::Format(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(code, e.to_string())
    }
}

fn unprocessable(msg: impl ToString) -> ApiError {
    ApiError(StatusCode::UNPROCESSABLE_ENTITY, msg.to_string())
}

type ApiResult<T> = Result<T, ApiError>;

/// Progress of a queued or running job, shared between the worker and any
/// number of stream readers.
struct Live {
    lines: Mutex<Vec<String>>,
    version: watch::Sender<u64>,
    finished: AtomicBool,
    cancel: Arc<AtomicBool>,
}

impl Live {
    fn new() -> Self {
        Self {
            lines: Mutex::new(Vec::new()),
            version: watch::channel(0).0,
            finished: AtomicBool::new(false),
            cancel: Arc::new(AtomicBool::new(false)),
        }
    }

    fn push(&self, line: String) {
        self.lines.lock().expect("live lock").push(line);
        self.version.send_modify(|v| *v += 1);
    }

    fn finish(&self) {
        self.finished.store(true, Ordering::SeqCst);
        self.version.send_modify(|v| *v += 1);
    }
}

pub struct Service {
    store: Store,
    live: Mutex<HashMap<String, Arc<Live>>>,
    queue: mpsc::UnboundedSender<String>,
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    /// Jobs executed concurrently. Zero leaves jobs queued.
    pub workers: usize,
}

impl Service {
    /// Opens the store, fails jobs interrupted by a previous shutdown,
    /// re-queues waiting ones and starts the workers.
    pub fn start(config: &ServiceConfig) -> Result<Arc<Self>, StoreError> {
        let store = Store::open(&config.data_dir)?;
        let (tx, rx) = mpsc::unbounded_channel();
        let svc = Arc::new(Self {
            store,
            live: Mutex::new(HashMap::new()),
            queue: tx,
        });
        for rec in svc.store.list_jobs()? {
            match rec.state {
                JobState::Running => {
                    svc.store
                        .transition(&rec.id, JobState::Failed, Some("interrupted by a restart".into()))?;
                }
                JobState::Queued => svc.enqueue(&rec.id),
                _ => {}
            }
        }
        let rx = Arc::new(tokio::sync::Mutex::new(rx));
        for _ in 0..config.workers {
            let (svc, rx) = (svc.clone(), rx.clone());
            tokio::spawn(async move {
                loop {
                    let Some(id) = rx.lock().await.recv().await else {
                        break;
                    };
                    let worker = svc.clone();
                    let _ = tokio::task::spawn_blocking(move || worker.run(&id)).await;
                }
            });
        }
        Ok(svc)
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    fn enqueue(&self, id: &str) {
        self.live.lock().expect("live lock").insert(id.into(), Arc::new(Live::new()));
        let _ = self.queue.send(id.into());
    }

    fn live(&self, id: &str) -> Option<Arc<Live>> {
        self.live.lock().expect("live lock").get(id).cloned()
    }

    fn record_line(&self, id: &str, live: &Live, rec: &StreamRecord) {
        let line = serde_json::to_string(rec).expect("serializable record");
        // The file comes first so a reader that misses the live buffer still
        // finds every line on disk.
        if let Err(e) = self.store.append_event(id, &line) {
            eprintln!("job {id}: cannot persist event: {e}");
        }
        live.push(line);
    }

    fn run(&self, id: &str) {
        let Some(live) = self.live(id) else { return };
        let seq = std::cell::Cell::new(0);
        let next = || {
            let s = seq.get();
            seq.set(s + 1);
            s
        };
        let final_state = match self.store.transition(id, JobState::Running, None) {
            Err(e) => {
                eprintln!("job {id}: {e}");
                None
            }
            Ok(_) if live.cancel.load(Ordering::SeqCst) => Some(self.store.transition(id, JobState::Cancelled, None)),
            Ok(rec) => {
                let clock = CancellableClock::new(live.cancel.clone());
                let mut sink = |segment: Option<usize>, e: &ProgressEvent| {
                    let rec = StreamRecord {
                        seq: next(),
                        segment,
                        event: Some(e.clone()),
                        state: None,
                    };
                    self.record_line(id, &live, &rec);
                };
                let outcome = execute(&self.store, &rec, &clock, &mut sink);
                let cancelled = live.cancel.load(Ordering::SeqCst);
                Some(match outcome {
                    Ok(result) => self
                        .store
                        .write_result(id, &result)
                        .and_then(|_| {
                            let state = if cancelled { JobState::Cancelled } else { JobState::Done };
                            self.store.transition(id, state, None)
                        }),
                    Err(_) if cancelled => self.store.transition(id, JobState::Cancelled, None),
                    Err(e) => self.store.transition(id, JobState::Failed, Some(e.to_string())),
                })
            }
        };
        if let Some(Ok(rec)) = final_state {
            let end = StreamRecord {
                seq: next(),
                segment: None,
                event: None,
                state: Some(rec.state),
            };
            self.record_line(id, &live, &end);
        } else if let Some(Err(e)) = final_state {
            eprintln!("job {id}: {e}");
        }
        live.finish();
        self.live.lock().expect("live lock").remove(id);
    }

    fn submit(&self, spec: JobSpec) -> ApiResult<JobRecord> {
        spec.config.validate().map_err(unprocessable)?;
        spec.weights.validate().map_err(unprocessable)?;
        let snapshot = match &spec.task {
            Task::Optimize { instance_id }
            | Task::RollingHorizon { instance_id, .. }
            | Task::Patterns { instance_id, .. } => Some(self.store.get_instance(instance_id)?),
            Task::EventReoptimize { source_job, changes } => Some(self.event_snapshot(source_job, changes)?),
            Task::Benchmark { bench } => {
                bench.solver.validate().map_err(unprocessable)?;
                None
            }
        };
        let rec = self.store.create_job(spec, snapshot.as_ref())?;
        self.enqueue(&rec.id);
        Ok(rec)
    }

    /// The instance an event job starts from, after checking that the source
    /// job finished with a roster and that the changes apply cleanly.
    fn event_snapshot(&self, source_job: &str, changes: &[ChangeRequest]) -> ApiResult<RosterInstance> {
        let source = self.store.load_job(source_job)?;
        if source.state != JobState::Done {
            return Err(ApiError(
                StatusCode::CONFLICT,
                format!("job {source_job} is {:?}, not done", source.state).to_lowercase(),
            ));
        }
        let result = self.store.read_result(source_job)?;
        let snapshot = self.store.snapshot(source_job)?;
        let (inst, _) = result
            .output
            .roster(&snapshot)
            .ok_or_else(|| unprocessable(format!("job {source_job} did not produce a single roster")))?;
        apply_changes(inst, changes).map_err(unprocessable)?;
        Ok(inst.clone())
    }
}

pub fn router(svc: Arc<Service>) -> Router {
    Router::new()
        .route("/v1/health", get(|| async { Json(json!({ "status": "ok" })) }))
        .route("/v1/schema", get(schema))
        .route("/v1/instances", get(list_instances).post(upload_instance))
        .route("/v1/instances/generate", post(generate))
        .route("/v1/instances/{id}", get(download_instance))
        .route("/v1/jobs", get(list_jobs).post(create_job))
        .route("/v1/jobs/{id}", get(get_job))
        .route("/v1/jobs/{id}/cancel", post(cancel_job))
        .route("/v1/jobs/{id}/events", get(events))
        .route("/v1/jobs/{id}/result", get(result))
        .route("/v1/jobs/{id}/roster.csv", get(roster_csv))
        .route("/v1/jobs/{id}/changes", post(post_changes))
        .with_state(svc)
}

type Svc = State<Arc<Service>>;

/// Defaults and ranges the UI validates forms against.
async fn schema() -> Json<serde_json::Value> {
    Json(json!({
        "config": HybridConfig::default(),
        "weights": ObjectiveWeights::default(),
        "generator": GeneratorConfig::default(),
        "ranges": {
            "gap_target": [0.0, 1.0],
            "lambda": [0.0, 1.0],
            "theta": [0.0, 1.0],
            "gamma": [0.0, 1.0],
            "mu": [0.0, null],
        },
        "modes": ["hybrid", "milp_alone"],
        "job_kinds": ["optimize", "event_reoptimize", "rolling_horizon", "patterns", "benchmark"],
    }))
}

#[derive(Serialize)]
struct Created {
    id: String,
}

async fn list_instances(State(svc): Svc) -> ApiResult<Json<Vec<String>>> {
    Ok(Json(svc.store.list_instances()?))
}

async fn upload_instance(State(svc): Svc, Json(inst): Json<RosterInstance>) -> ApiResult<(StatusCode, Json<Created>)> {
    let report = validate_instance(&inst);
    if !report.issues.is_empty() {
        let issues: Vec<String> = report.issues.iter().map(|i| i.describe()).collect();
        return Err(unprocessable(issues.join("; ")));
    }
    let id = svc.store.put_instance(&inst)?;
    Ok((StatusCode::CREATED, Json(Created { id })))
}

#[derive(Deserialize)]
struct GenerateRequest {
    #[serde(default)]
    config: GeneratorConfig,
    #[serde(default)]
    seed: u64,
}

async fn generate(State(svc): Svc, Json(req): Json<GenerateRequest>) -> ApiResult<(StatusCode, Json<Created>)> {
    let inst = generate_instance(&req.config, req.seed).map_err(unprocessable)?;
    let id = svc.store.put_instance(&inst)?;
    Ok((StatusCode::CREATED, Json(Created { id })))
}

async fn download_instance(State(svc): Svc, Path(id): Path<String>) -> ApiResult<Json<RosterInstance>> {
    Ok(Json(svc.store.get_instance(&id)?))
}

async fn list_jobs(State(svc): Svc) -> ApiResult<Json<Vec<JobRecord>>> {
    Ok(Json(svc.store.list_jobs()?))
}

async fn create_job(State(svc): Svc, Json(spec): Json<JobSpec>) -> ApiResult<(StatusCode, Json<JobRecord>)> {
    Ok((StatusCode::CREATED, Json(svc.submit(spec)?)))
}

async fn get_job(State(svc): Svc, Path(id): Path<String>) -> ApiResult<Json<JobRecord>> {
    Ok(Json(svc.store.load_job(&id)?))
}

async fn cancel_job(State(svc): Svc, Path(id): Path<String>) -> ApiResult<Json<JobRecord>> {
    let rec = svc.store.load_job(&id)?;
    match svc.live(&id) {
        Some(live) if !rec.state.is_terminal() => {
            live.cancel.store(true, Ordering::SeqCst);
            Ok(Json(rec))
        }
        _ => Err(ApiError(StatusCode::CONFLICT, format!("job {id} already finished"))),
    }
}

#[derive(Deserialize)]
struct StreamQuery {
    #[serde(default)]
    from: usize,
}

/// Newline-delimited progress records, replayed from `from` and followed
/// live until the job finishes.
async fn events(State(svc): Svc, Path(id): Path<String>, Query(q): Query<StreamQuery>) -> ApiResult<Response> {
    svc.store.load_job(&id)?;
    let ndjson = |body: Body| ([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response();
    let Some(live) = svc.live(&id) else {
        let lines = svc.store.read_events(&id)?;
        let text: String = lines.iter().skip(q.from).map(|l| format!("{l}\n")).collect();
        return Ok(ndjson(Body::from(text)));
    };
    let rx = live.version.subscribe();
    let s = stream::unfold((live, rx, q.from), |(live, mut rx, pos)| async move {
        loop {
            rx.borrow_and_update();
            let finished = live.finished.load(Ordering::SeqCst);
            let batch: String = {
                let lines = live.lines.lock().expect("live lock");
                lines.iter().skip(pos).map(|l| format!("{l}\n")).collect()
            };
            if !batch.is_empty() {
                let n = batch.lines().count();
                return Some((Ok::<_, std::io::Error>(batch), (live, rx, pos + n)));
            }
            if finished || rx.changed().await.is_err() {
                return None;
            }
        }
    });
    Ok(ndjson(Body::from_stream(s)))
}

fn require_done(svc: &Service, id: &str) -> ApiResult<JobRecord> {
    let rec = svc.store.load_job(id)?;
    if rec.state != JobState::Done && rec.state != JobState::Cancelled {
        let msg = match &rec.error {
            Some(e) => format!("job {id} failed: {e}"),
            None => format!("job {id} has no result yet"),
        };
        return Err(ApiError(StatusCode::CONFLICT, msg));
    }
    Ok(rec)
}

async fn result(State(svc): Svc, Path(id): Path<String>) -> ApiResult<Response> {
    let rec = require_done(&svc, &id)?;
    let result = svc.store.read_result(&id)?;
    Ok(Json(json!({ "job": rec, "result": result })).into_response())
}

async fn roster_csv(State(svc): Svc, Path(id): Path<String>) -> ApiResult<Response> {
    require_done(&svc, &id)?;
    let csv = svc.store.roster_csv(&id)?;
    Ok(([(header::CONTENT_TYPE, "text/csv")], csv).into_response())
}

#[derive(Deserialize)]
struct ChangeSubmission {
    changes: Vec<ChangeRequest>,
    config: Option<HybridConfig>,
    weights: Option<ObjectiveWeights>,
}

async fn post_changes(
    State(svc): Svc,
    Path(id): Path<String>,
    Json(req): Json<ChangeSubmission>,
) -> ApiResult<(StatusCode, Json<JobRecord>)> {
    let source = svc.store.load_job(&id)?;
    let spec = JobSpec {
        task: Task::EventReoptimize {
            source_job: id,
            changes: req.changes,
        },
        config: req.config.unwrap_or(source.spec.config),
        weights: req.weights.unwrap_or(source.spec.weights),
    };
    Ok((StatusCode::CREATED, Json(svc.submit(spec)?)))
}

/// Serves until interrupted.
pub async fn serve(config: ServiceConfig, port: u16) -> std::io::Result<()> {
    let svc = Service::start(&config).map_err(std::io::Error::other)?;
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(svc))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
