//! Request and response bodies of the morphoforge HTTP/JSON API.
//!
//! | method | path                     | body → response                      |
//! |--------|--------------------------|--------------------------------------|
//! | GET    | `/health`                | → `{"status": "ok"}`                 |
//! | GET    | `/v1/scenarios`          | → `Vec<Scenario>`                    |
//! | POST   | `/v1/evaluate`           | [`EvaluateRequest`] → [`EvaluateResponse`] |
//! | POST   | `/v1/urdf`               | [`UrdfRequest`] → [`UrdfResponse`]   |
//! | POST   | `/v1/jobs`               | [`JobRequest`] → [`JobStatus`]       |
//! | GET    | `/v1/jobs/{id}`          | → [`JobStatus`]                      |
//! | GET    | `/v1/jobs/{id}/archive`  | → `ParetoArchive` once succeeded     |
//! | DELETE | `/v1/jobs/{id}`          | → [`JobStatus`] (requests cancellation) |
//!
//! Failures carry an [`ErrorBody`].

use morphoforge_core::{ErrorKind, IkOverrides, OptimizerConfig, ProgressEvent, Scenario};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

/// A scenario given either by builtin name or inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioSpec {
    Builtin(String),
    Inline(Scenario),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateRequest {
    /// Design string, e.g. `Y:0.3,P:0.25,S:0.2,F:0.01,F:0.01,F:0.01`.
    pub design: String,
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub ik: IkOverrides,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetReport {
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations_used: usize,
    pub q: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateResponse {
    pub design: String,
    pub scenario: String,
    pub dof: usize,
    pub e_task: f64,
    pub e_design: f64,
    pub e_design_joint: u32,
    pub e_design_length: f64,
    pub targets: Vec<TargetReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UrdfRequest {
    pub design: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UrdfResponse {
    pub urdf: String,
    pub dof: usize,
    pub total_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRequest {
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    /// Applied on top of the scenario's own IK overrides.
    #[serde(default)]
    pub ik: IkOverrides,
    /// IK seed; the optimizer seed lives in `optimizer.seed`.
    #[serde(default)]
    pub ik_seed: u64,
    /// Evaluation threads; `None` uses all cores. Never changes results.
    #[serde(default)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Running,
    Succeeded,
    Failed,
    Cancelled,
}

impl JobState {
    pub fn is_terminal(self) -> bool {
        self != JobState::Running
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobStatus {
    pub id: Uuid,
    pub state: JobState,
    pub scenario: String,
    pub total_evaluations: usize,
    pub progress: Option<ProgressEvent>,
    pub error: Option<ApiError>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApiErrorKind {
    Validation,
    Io,
    Internal,
    Cancelled,
    NotFound,
    Conflict,
}

impl From<ErrorKind> for ApiErrorKind {
    fn from(kind: ErrorKind) -> Self {
        match kind {
            ErrorKind::Validation => ApiErrorKind::Validation,
            ErrorKind::Io => ApiErrorKind::Io,
            ErrorKind::Internal => ApiErrorKind::Internal,
            ErrorKind::Cancelled => ApiErrorKind::Cancelled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub kind: ApiErrorKind,
    pub message: String,
}

impl From<&morphoforge_core::Error> for ApiError {
    fn from(e: &morphoforge_core::Error) -> Self {
        ApiError {
            kind: e.kind().into(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: ApiError,
}
