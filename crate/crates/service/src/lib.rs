//! HTTP/JSON front end for morphoforge.
//!
//! Single evaluations and URDF exports are answered directly; optimization
//! runs become jobs that execute on the blocking pool and are polled for
//! progress. Routes and bodies are listed in [`morphoforge_api`].

use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use dashmap::DashMap;
use morphoforge_api::{
    ApiError, ApiErrorKind, ErrorBody, EvaluateRequest, EvaluateResponse, JobRequest, JobState, JobStatus,
    ScenarioSpec, TargetReport, UrdfRequest, UrdfResponse,
};
use morphoforge_core::{
    builtin_scenario, builtin_scenarios, eval_design, eval_task, export_urdf, IkConfig, Optimizer, ParetoArchive,
    ProgressEvent, RobotDesign, Scenario,
};
use tokio::net::TcpListener;
use uuid::Uuid;

/// Error response: an [`ErrorBody`] with a status derived from its kind.
#[derive(Debug)]
pub struct AppError(pub ApiError);

impl AppError {
    fn new(kind: ApiErrorKind, message: impl Into<String>) -> Self {
        AppError(ApiError {
            kind,
            message: message.into(),
        })
    }
}

impl From<morphoforge_core::Error> for AppError {
    fn from(e: morphoforge_core::Error) -> Self {
        AppError(ApiError::from(&e))
    }
}

impl From<JsonRejection> for AppError {
    fn from(e: JsonRejection) -> Self {
        AppError::new(ApiErrorKind::Validation, e.body_text())
    }
}

impl IntoResponse for AppError {
    fn into_response(self) -> Response {
        let status = match self.0.kind {
            ApiErrorKind::Validation => StatusCode::BAD_REQUEST,
            ApiErrorKind::NotFound => StatusCode::NOT_FOUND,
            ApiErrorKind::Conflict | ApiErrorKind::Cancelled => StatusCode::CONFLICT,
            ApiErrorKind::Io | ApiErrorKind::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(ErrorBody { error: self.0 })).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, AppError>;

struct Job {
    status: Mutex<JobStatus>,
    archive: OnceLock<Arc<ParetoArchive>>,
    cancel: Arc<AtomicBool>,
}

impl Job {
    fn snapshot(&self) -> JobStatus {
        self.status.lock().expect("job status lock").clone()
    }

    fn update(&self, f: impl FnOnce(&mut JobStatus)) {
        f(&mut self.status.lock().expect("job status lock"));
    }
}

#[derive(Clone, Default)]
pub struct AppState {
    jobs: Arc<DashMap<Uuid, Arc<Job>>>,
}

impl AppState {
    fn job(&self, id: Uuid) -> Result<Arc<Job>, AppError> {
        self.jobs
            .get(&id)
            .map(|j| Arc::clone(&j))
            .ok_or_else(|| AppError::new(ApiErrorKind::NotFound, format!("no job {id}")))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/v1/scenarios", get(scenarios))
        .route("/v1/evaluate", post(evaluate))
        .route("/v1/urdf", post(urdf))
        .route("/v1/jobs", post(create_job))
        .route("/v1/jobs/{id}", get(job_status).delete(cancel_job))
        .route("/v1/jobs/{id}/archive", get(job_archive))
        .with_state(state)
}

/// Serves the API on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(AppState::default()))
        .with_graceful_shutdown(shutdown)
        .await
}

/// Binds `addr` and serves in a background task; returns the bound address.
pub async fn spawn(addr: SocketAddr) -> std::io::Result<SocketAddr> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    tokio::spawn(async move {
        if let Err(e) = serve(listener, std::future::pending()).await {
            tracing::error!("server stopped: {e}");
        }
    });
    Ok(local)
}

fn resolve(spec: ScenarioSpec) -> Result<Scenario, AppError> {
    let scenario = match spec {
        ScenarioSpec::Builtin(name) => {
            builtin_scenario(&name).ok_or(morphoforge_core::Error::UnknownScenario(name))?
        }
        ScenarioSpec::Inline(s) => s,
    };
    scenario.validate()?;
    Ok(scenario)
}

fn parse_design(text: &str) -> Result<RobotDesign, AppError> {
    Ok(text.parse::<RobotDesign>()?)
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, AppError> + Send + 'static) -> Result<T, AppError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| AppError::new(ApiErrorKind::Internal, format!("worker task failed: {e}")))?
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn scenarios() -> Json<Vec<Scenario>> {
    Json(builtin_scenarios())
}

async fn evaluate(body: Result<Json<EvaluateRequest>, JsonRejection>) -> ApiResult<EvaluateResponse> {
    let Json(req) = body?;
    let design = parse_design(&req.design)?;
    let scenario = resolve(req.scenario)?;
    if design.modules.is_empty() {
        return Err(AppError::new(ApiErrorKind::Validation, "design has no modules"));
    }
    let ik = scenario.ik.merge(&req.ik).apply(IkConfig::default()).with_seed(req.seed);
    ik.validate()?;
    blocking(move || {
        let task = eval_task(&design, &scenario, &ik);
        let cost = eval_design(&design);
        Ok(EvaluateResponse {
            design: design.to_string(),
            scenario: scenario.name.clone(),
            dof: design.dof(),
            e_task: task.e_task,
            e_design: cost.e_design,
            e_design_joint: cost.joint,
            e_design_length: cost.length,
            targets: task
                .solutions
                .into_iter()
                .map(|s| TargetReport {
                    residual_norm: s.residual_norm,
                    converged: s.converged,
                    iterations_used: s.iterations_used,
                    q: s.q,
                })
                .collect(),
        })
    })
    .await
    .map(Json)
}

async fn urdf(body: Result<Json<UrdfRequest>, JsonRejection>) -> ApiResult<UrdfResponse> {
    let Json(req) = body?;
    let design = parse_design(&req.design)?;
    Ok(Json(UrdfResponse {
        urdf: export_urdf(&design, &req.name),
        dof: design.dof(),
        total_length: design.total_length(),
    }))
}

async fn create_job(
    State(state): State<AppState>,
    body: Result<Json<JobRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<JobStatus>), AppError> {
    let Json(req) = body?;
    let scenario = resolve(req.scenario)?;
    let ik = scenario.ik.merge(&req.ik).apply(IkConfig::default()).with_seed(req.ik_seed);
    req.optimizer.validate()?;
    ik.validate()?;
    if req.workers == Some(0) {
        return Err(AppError::new(ApiErrorKind::Validation, "invalid workers: must be at least 1"));
    }

    let id = Uuid::new_v4();
    let job = Arc::new(Job {
        status: Mutex::new(JobStatus {
            id,
            state: JobState::Running,
            scenario: scenario.name.clone(),
            total_evaluations: req.optimizer.total_evaluations,
            progress: None,
            error: None,
        }),
        archive: OnceLock::new(),
        cancel: Arc::new(AtomicBool::new(false)),
    });
    state.jobs.insert(id, Arc::clone(&job));
    tracing::info!(%id, scenario = %scenario.name, evaluations = req.optimizer.total_evaluations, "job started");

    let worker = Arc::clone(&job);
    tokio::task::spawn_blocking(move || {
        let sink = |e: ProgressEvent| worker.update(|s| s.progress = Some(e));
        let mut optimizer = Optimizer::new(scenario, req.optimizer, ik)
            .progress(&sink)
            .cancel_flag(Arc::clone(&worker.cancel));
        if let Some(w) = req.workers {
            optimizer = optimizer.workers(w);
        }
        let outcome = optimizer.run();
        match outcome {
            Ok(archive) => {
                let _ = worker.archive.set(Arc::new(archive));
                worker.update(|s| s.state = JobState::Succeeded);
                tracing::info!(%id, "job finished");
            }
            Err(e) => {
                let state = if matches!(e, morphoforge_core::Error::Cancelled) {
                    JobState::Cancelled
                } else {
                    JobState::Failed
                };
                tracing::warn!(%id, "job ended: {e}");
                worker.update(|s| {
                    s.state = state;
                    s.error = Some(ApiError::from(&e));
                });
            }
        }
    });
    Ok((StatusCode::ACCEPTED, Json(job.snapshot())))
}

async fn job_status(State(state): State<AppState>, Path(id): Path<Uuid>) -> ApiResult<JobStatus> {
    Ok(Json(state.job(id)?.snapshot()))
}

async fn cancel_job(State(state): State<AppState>, Path(id): Path<Uuid>) -> ApiResult<JobStatus> {
    let job = state.job(id)?;
    job.cancel.store(true, Ordering::Relaxed);
    Ok(Json(job.snapshot()))
}

async fn job_archive(State(state): State<AppState>, Path(id): Path<Uuid>) -> Result<Response, AppError> {
    let job = state.job(id)?;
    match job.archive.get() {
        Some(archive) => Ok(Json(archive.as_ref()).into_response()),
        None => Err(AppError::new(
            ApiErrorKind::Conflict,
            format!("job {id} has no archive (state {:?})", job.snapshot().state),
        )),
    }
}
