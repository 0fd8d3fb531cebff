//! JSON-over-HTTP routes for the planner UI.

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::session::{
    Action, ActionOutput, CriteriaRequest, FilterRule, IterationRecord, SessionManager,
    SessionState,
};

pub type AppState = Arc<SessionManager>;

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::UnknownSession(_)
            | ServiceError::UnknownBundle(_)
            | ServiceError::UnknownSolution(_) => StatusCode::NOT_FOUND,
            ServiceError::CriteriaNotSet
            | ServiceError::NotShortlisted(_)
            | ServiceError::Finalized
            | ServiceError::ReplayDiverged { .. } => StatusCode::CONFLICT,
            ServiceError::InvalidThreshold(_) | ServiceError::InvalidRequest(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            ServiceError::Core(harvest_core::CoreError::EmptyCohort)
            | ServiceError::Core(harvest_core::CoreError::DimensionMismatch(_))
            | ServiceError::Core(harvest_core::CoreError::InvalidParameter(_)) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            ServiceError::MissingArtifact(_)
            | ServiceError::FingerprintMismatch(_)
            | ServiceError::Core(_)
            | ServiceError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = self.status();
        if status.is_server_error() {
            log::error!("{self}");
        }
        let body = ErrorBody {
            error: self.code().into(),
            message: self.to_string(),
        };
        (status, Json(body)).into_response()
    }
}

/// Body rejections become the same error shape as everything else.
pub struct ApiJson<T>(pub T);

impl<S, T> axum::extract::FromRequest<S> for ApiJson<T>
where
    Json<T>: axum::extract::FromRequest<S, Rejection = JsonRejection>,
    S: Send + Sync,
{
    type Rejection = ServiceError;

    async fn from_request(req: axum::extract::Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(ApiJson(v)),
            Err(e) => Err(ServiceError::InvalidRequest(e.body_text())),
        }
    }
}

type ApiResult<T> = Result<Json<T>, ServiceError>;

pub fn router(manager: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/bundles", get(bundles))
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(session_state))
        .route("/sessions/{id}/overview", get(overview))
        .route("/sessions/{id}/criteria", put(set_criteria))
        .route("/sessions/{id}/scores", get(scores))
        .route("/sessions/{id}/filter", post(filter))
        .route("/sessions/{id}/solutions/{sid}", get(solution))
        .route("/sessions/{id}/inspections", post(inspect))
        .route("/sessions/{id}/shortlist", post(shortlist))
        .route("/sessions/{id}/finalize", post(finalize))
        .route("/sessions/{id}/report", get(report))
        .route("/sessions/{id}/journal", get(journal))
        .route("/sessions/{id}/replay", post(replay))
        .with_state(manager)
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    version: &'static str,
}

async fn health() -> Json<Health> {
    Json(Health {
        status: "ok",
        version: env!("CARGO_PKG_VERSION"),
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BundleInfo {
    pub name: String,
    pub instance: String,
    pub instance_fingerprint: String,
    pub archive_fingerprint: String,
    pub cohort_fingerprint: String,
    pub solutions: usize,
    pub scenarios: usize,
}

async fn bundles(State(m): State<AppState>) -> ApiResult<Vec<BundleInfo>> {
    let mut out = Vec::new();
    for name in m.bundle_names() {
        let b = m.bundle(&name)?;
        out.push(BundleInfo {
            name,
            instance: b.instance.name.clone(),
            instance_fingerprint: b.instance_fingerprint.clone(),
            archive_fingerprint: b.archive_fingerprint.clone(),
            cohort_fingerprint: b.cohort.fingerprint.clone(),
            solutions: b.archive.len(),
            scenarios: b.matrix.scenarios.len(),
        });
    }
    Ok(Json(out))
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct CreateSession {
    #[serde(default)]
    pub bundle: Option<String>,
}

async fn create_session(
    State(m): State<AppState>,
    body: axum::body::Bytes,
) -> Result<(StatusCode, Json<SessionState>), ServiceError> {
    // an empty body picks the only bundle
    let req: CreateSession = if body.iter().all(u8::is_ascii_whitespace) {
        CreateSession::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ServiceError::InvalidRequest(e.to_string()))?
    };
    let state = m.create_session(req.bundle.as_deref())?;
    Ok((StatusCode::CREATED, Json(state)))
}

async fn list_sessions(State(m): State<AppState>) -> Json<Vec<SessionState>> {
    Json(m.list())
}

async fn session_state(
    State(m): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<SessionState> {
    Ok(Json(m.read(&id, |s| Ok(s.state.clone()))?))
}

#[derive(Debug, Deserialize)]
struct OverviewQuery {
    /// Number of leading periods, or "all".
    periods: Option<String>,
}

async fn overview(
    State(m): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<OverviewQuery>,
) -> ApiResult<crate::session::Overview> {
    let focus = match q.periods.as_deref() {
        None => None,
        Some("all") => Some(usize::MAX),
        Some(n) => Some(n.parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(|| {
            ServiceError::InvalidRequest(format!(
                "periods must be a positive number or \"all\", got {n:?}"
            ))
        })?),
    };
    Ok(Json(m.read(&id, |s| s.overview(focus))?))
}

async fn set_criteria(
    State(m): State<AppState>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<CriteriaRequest>,
) -> ApiResult<ActionOutput> {
    Ok(Json(m.set_criteria(&id, req)?))
}

async fn scores(
    State(m): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Vec<crate::session::SolutionScores>> {
    Ok(Json(m.read(&id, |s| s.all_scores())?))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FilterRequest {
    pub rules: Vec<FilterRule>,
}

async fn filter(
    State(m): State<AppState>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<FilterRequest>,
) -> ApiResult<ActionOutput> {
    Ok(Json(m.act(&id, Action::Filter { rules: req.rules })?))
}

async fn solution(
    State(m): State<AppState>,
    Path((id, sid)): Path<(String, u32)>,
) -> ApiResult<crate::session::SolutionDetail> {
    Ok(Json(m.read(&id, |s| s.detail(sid))?))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct InspectRequest {
    pub solution: u32,
}

/// Like the solution view, but journaled.
async fn inspect(
    State(m): State<AppState>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<InspectRequest>,
) -> ApiResult<ActionOutput> {
    Ok(Json(m.act(
        &id,
        Action::InspectDecisions {
            solution: req.solution,
        },
    )?))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ShortlistRequest {
    pub ids: Vec<u32>,
}

async fn shortlist(
    State(m): State<AppState>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<ShortlistRequest>,
) -> ApiResult<ActionOutput> {
    Ok(Json(m.act(&id, Action::Shortlist { ids: req.ids })?))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FinalizeRequest {
    pub solution: u32,
}

async fn finalize(
    State(m): State<AppState>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<FinalizeRequest>,
) -> ApiResult<crate::session::DecisionReport> {
    m.act(
        &id,
        Action::Finalize {
            solution: req.solution,
        },
    )?;
    Ok(Json(m.read(&id, |s| Ok(s.report()))?))
}

async fn report(
    State(m): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<crate::session::DecisionReport> {
    Ok(Json(m.read(&id, |s| Ok(s.report()))?))
}

async fn journal(
    State(m): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Vec<IterationRecord>> {
    Ok(Json(m.read(&id, |s| Ok(s.state.journal.clone()))?))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReplayResponse {
    pub records: usize,
    pub identical: bool,
}

async fn replay(State(m): State<AppState>, Path(id): Path<String>) -> ApiResult<ReplayResponse> {
    let results = m.replay(&id)?;
    Ok(Json(ReplayResponse {
        records: results.len(),
        identical: true,
    }))
}

/// Serves `router` until ctrl-c.
pub async fn serve(manager: SessionManager, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(manager)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
