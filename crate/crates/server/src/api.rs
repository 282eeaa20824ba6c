//! HTTP routes.
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/git-repository-version-process/start-git-repository-version-process` | queue an analysis |
//! | GET | `/git-repository-version-process/user/{id}` | list a user's jobs |
//! | GET | `/git-repository-version/{id}` | fetch a finished report |
//! | POST | `/auth/register` | create an account |
//! | POST | `/auth/login` | obtain a bearer token |

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequestParts, Path, State};
use axum::http::header::{AUTHORIZATION, CONTENT_TYPE};
use axum::http::request::Parts;
use axum::http::{HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::{AllowOrigin, CorsLayer};
use uuid::Uuid;

use crate::model::{AnalysisJob, JobId, Stage, UserId};
use crate::pipeline::{Pipeline, PipelineError};

pub const START_PATH: &str = "/git-repository-version-process/start-git-repository-version-process";
pub const LIST_PATH: &str = "/git-repository-version-process/user/{id}";
pub const RESULT_PATH: &str = "/git-repository-version/{id}";
pub const REGISTER_PATH: &str = "/auth/register";
pub const LOGIN_PATH: &str = "/auth/login";

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    stage: Option<Stage>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
            stage: None,
        }
    }

    pub fn status(&self) -> StatusCode {
        self.status
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = match self.stage {
            Some(stage) => json!({ "error": self.message, "stage": stage }),
            None => json!({ "error": self.message }),
        };
        (self.status, Json(body)).into_response()
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        let status = match &e {
            PipelineError::Validation(_) => StatusCode::BAD_REQUEST,
            PipelineError::UnknownUser | PipelineError::InvalidCredentials => StatusCode::UNAUTHORIZED,
            PipelineError::DuplicateUsername(_) => StatusCode::CONFLICT,
            PipelineError::NotFound => StatusCode::NOT_FOUND,
            PipelineError::NotReady(stage) => {
                return Self {
                    status: StatusCode::CONFLICT,
                    message: e.to_string(),
                    stage: Some(*stage),
                }
            }
            PipelineError::Store(_) | PipelineError::Io { .. } => {
                log::error!("{e}");
                return Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal error");
            }
        };
        Self::new(status, e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        Self::new(StatusCode::BAD_REQUEST, r.body_text())
    }
}

/// The user owning the request's bearer token.
pub struct CurrentUser(pub UserId);

impl FromRequestParts<Pipeline> for CurrentUser {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, pipeline: &Pipeline) -> Result<Self, Self::Rejection> {
        let token = parts
            .headers
            .get(AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim)
            .ok_or_else(|| ApiError::new(StatusCode::UNAUTHORIZED, "missing bearer token"))?;
        pipeline
            .session_user(token)
            .map(CurrentUser)
            .ok_or_else(|| ApiError::new(StatusCode::UNAUTHORIZED, "invalid or expired token"))
    }
}

#[derive(Debug, Deserialize)]
pub struct StartRequest {
    pub url: String,
    #[serde(default)]
    pub branch: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StartResponse {
    pub job_id: JobId,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct JobSummary {
    pub job_id: JobId,
    pub url: String,
    pub branch: Option<String>,
    pub started_at: DateTime<Utc>,
    pub stage: Stage,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finished_at: Option<DateTime<Utc>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result_id: Option<JobId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl From<AnalysisJob> for JobSummary {
    fn from(j: AnalysisJob) -> Self {
        Self {
            job_id: j.job_id,
            url: j.repo_url,
            branch: j.branch,
            started_at: j.started_at,
            stage: j.stage,
            finished_at: j.finished_at,
            result_id: j.result_id,
            error: j.error,
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct Credentials {
    pub username: String,
    pub password: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RegisterResponse {
    pub user_id: UserId,
    pub username: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LoginResponse {
    pub token: String,
    pub expires_at: DateTime<Utc>,
    pub user_id: UserId,
}

async fn start(
    State(pipeline): State<Pipeline>,
    CurrentUser(user): CurrentUser,
    body: Result<Json<StartRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<StartResponse>), ApiError> {
    let Json(req) = body?;
    let job_id = pipeline.start_analysis(user, &req.url, req.branch.as_deref())?;
    Ok((StatusCode::ACCEPTED, Json(StartResponse { job_id })))
}

async fn list(
    State(pipeline): State<Pipeline>,
    CurrentUser(user): CurrentUser,
    Path(id): Path<String>,
) -> Result<Json<Vec<JobSummary>>, ApiError> {
    if Uuid::parse_str(&id).ok() != Some(user) {
        return Err(ApiError::new(StatusCode::FORBIDDEN, "jobs of another user"));
    }
    let jobs = pipeline.list_jobs(user)?;
    Ok(Json(jobs.into_iter().map(JobSummary::from).collect()))
}

async fn result(
    State(pipeline): State<Pipeline>,
    CurrentUser(user): CurrentUser,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let id = Uuid::parse_str(&id).map_err(|_| ApiError::from(PipelineError::NotFound))?;
    let job = pipeline.job(&id).ok_or(PipelineError::NotFound)?;
    if job.user_id != user {
        return Err(ApiError::new(StatusCode::FORBIDDEN, "result of another user"));
    }
    let body = pipeline.get_result(&id)?;
    Ok(([(CONTENT_TYPE, "application/json")], body).into_response())
}

async fn register(
    State(pipeline): State<Pipeline>,
    body: Result<Json<Credentials>, JsonRejection>,
) -> Result<(StatusCode, Json<RegisterResponse>), ApiError> {
    let Json(c) = body?;
    let user_id = pipeline.register_user(&c.username, &c.password)?;
    Ok((
        StatusCode::CREATED,
        Json(RegisterResponse {
            user_id,
            username: c.username.trim().to_string(),
        }),
    ))
}

async fn login(
    State(pipeline): State<Pipeline>,
    body: Result<Json<Credentials>, JsonRejection>,
) -> Result<Json<LoginResponse>, ApiError> {
    let Json(c) = body?;
    let s = pipeline.authenticate(&c.username, &c.password)?;
    Ok(Json(LoginResponse {
        token: s.token,
        expires_at: s.expires_at,
        user_id: s.user_id,
    }))
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "no such route")
}

/// All routes. `cors_origins` lists the browser origins allowed to call the
/// API; `*` allows any.
pub fn router(pipeline: Pipeline, cors_origins: &[String]) -> Router {
    let allow = if cors_origins.iter().any(|o| o == "*") {
        AllowOrigin::any()
    } else {
        AllowOrigin::list(
            cors_origins
                .iter()
                .filter_map(|o| HeaderValue::from_str(o).ok()),
        )
    };
    let cors = CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([AUTHORIZATION, CONTENT_TYPE]);
    Router::new()
        .route(START_PATH, post(start))
        .route(LIST_PATH, get(list))
        .route(RESULT_PATH, get(result))
        .route(REGISTER_PATH, post(register))
        .route(LOGIN_PATH, post(login))
        .fallback(not_found)
        .layer(cors)
        .with_state(pipeline)
}
