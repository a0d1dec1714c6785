//! Typed async client for the morphoforge HTTP/JSON API.

use std::time::Duration;

use morphoforge_api::{
    ApiError, ApiErrorKind, ErrorBody, EvaluateRequest, EvaluateResponse, JobRequest, JobStatus, UrdfRequest,
    UrdfResponse,
};
use morphoforge_core::{ParetoArchive, Scenario};
use serde::de::DeserializeOwned;
use serde::Serialize;
use uuid::Uuid;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    /// The service rejected or failed the request.
    #[error("{}", .0.message)]
    Api(ApiError),
    #[error("cannot reach service at {url}: {source}")]
    Transport {
        url: String,
        #[source]
        source: reqwest::Error,
    },
    #[error("unexpected response from {url}: {message}")]
    Protocol { url: String, message: String },
}

impl ClientError {
    /// Error class for exit codes: transport failures count as IO.
    pub fn kind(&self) -> ApiErrorKind {
        match self {
            ClientError::Api(e) => e.kind,
            ClientError::Transport { .. } => ApiErrorKind::Io,
            ClientError::Protocol { .. } => ApiErrorKind::Internal,
        }
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        Self {
            base: base.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    async fn send<T: DeserializeOwned>(&self, url: String, request: reqwest::RequestBuilder) -> Result<T> {
        let transport = |source| ClientError::Transport { url: url.clone(), source };
        let response = request.send().await.map_err(transport)?;
        let status = response.status();
        let bytes = response.bytes().await.map_err(transport)?;
        if status.is_success() {
            return serde_json::from_slice(&bytes).map_err(|e| ClientError::Protocol {
                url: url.clone(),
                message: e.to_string(),
            });
        }
        match serde_json::from_slice::<ErrorBody>(&bytes) {
            Ok(body) => Err(ClientError::Api(body.error)),
            Err(_) => Err(ClientError::Protocol {
                url,
                message: format!("status {status}: {}", String::from_utf8_lossy(&bytes)),
            }),
        }
    }

    async fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T> {
        let url = format!("{}{path}", self.base);
        self.send(url.clone(), self.http.get(&url)).await
    }

    async fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T> {
        let url = format!("{}{path}", self.base);
        self.send(url.clone(), self.http.post(&url).json(body)).await
    }

    pub async fn health(&self) -> Result<()> {
        self.get::<serde_json::Value>("/health").await.map(|_| ())
    }

    pub async fn scenarios(&self) -> Result<Vec<Scenario>> {
        self.get("/v1/scenarios").await
    }

    pub async fn evaluate(&self, request: &EvaluateRequest) -> Result<EvaluateResponse> {
        self.post("/v1/evaluate", request).await
    }

    pub async fn urdf(&self, request: &UrdfRequest) -> Result<UrdfResponse> {
        self.post("/v1/urdf", request).await
    }

    pub async fn submit_job(&self, request: &JobRequest) -> Result<JobStatus> {
        self.post("/v1/jobs", request).await
    }

    pub async fn job_status(&self, id: Uuid) -> Result<JobStatus> {
        self.get(&format!("/v1/jobs/{id}")).await
    }

    pub async fn cancel_job(&self, id: Uuid) -> Result<JobStatus> {
        let url = format!("{}/v1/jobs/{id}", self.base);
        self.send(url.clone(), self.http.delete(&url)).await
    }

    pub async fn job_archive(&self, id: Uuid) -> Result<ParetoArchive> {
        self.get(&format!("/v1/jobs/{id}/archive")).await
    }

    /// Polls until the job leaves the running state, calling `on_status`
    /// whenever its progress changes. A failed or cancelled job becomes
    /// [`ClientError::Api`].
    pub async fn wait_for_job(
        &self,
        id: Uuid,
        poll: Duration,
        mut on_status: impl FnMut(&JobStatus),
    ) -> Result<JobStatus> {
        let mut last = None;
        loop {
            let status = self.job_status(id).await?;
            if status.progress != last {
                last = status.progress;
                on_status(&status);
            }
            if status.state.is_terminal() {
                return match status.error {
                    Some(e) => Err(ClientError::Api(e)),
                    None => Ok(status),
                };
            }
            tokio::time::sleep(poll).await;
        }
    }

    /// Submits a job and waits for its archive.
    pub async fn run_job(
        &self,
        request: &JobRequest,
        poll: Duration,
        on_status: impl FnMut(&JobStatus),
    ) -> Result<ParetoArchive> {
        let job = self.submit_job(request).await?;
        self.wait_for_job(job.id, poll, on_status).await?;
        self.job_archive(job.id).await
    }
}
