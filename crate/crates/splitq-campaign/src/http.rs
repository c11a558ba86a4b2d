//! JSON-over-HTTP wire API.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Serialize;
use splitq_core::splitting::{FieldError, SplittingError};
use tower_http::cors::CorsLayer;

use crate::{BatchInput, CampaignError, CampaignService, CreateSession};

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub error: &'static str,
    pub message: String,
    pub fields: Vec<FieldError>,
}

pub struct ApiError(pub CampaignError);

impl From<CampaignError> for ApiError {
    fn from(e: CampaignError) -> Self {
        ApiError(e)
    }
}

impl ApiError {
    fn parts(&self) -> (StatusCode, &'static str) {
        use CampaignError as E;
        match &self.0 {
            E::Invalid(_) | E::UnknownEstimator(_) | E::Abatement(_) | E::OutOfRange { .. } => {
                (StatusCode::UNPROCESSABLE_ENTITY, "invalid_request")
            }
            E::Splitting(SplittingError::Complete) => (StatusCode::CONFLICT, "session_complete"),
            E::Splitting(SplittingError::Aborted(_)) => (StatusCode::CONFLICT, "session_aborted"),
            E::Splitting(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_request"),
            E::EstimatorFailed { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "estimator_failed"),
            E::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
            E::Storage(_) | E::Corrupt { .. } | E::Replay { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, error) = self.parts();
        let body = ErrorBody {
            error,
            message: self.0.to_string(),
            fields: self.0.fields(),
        };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| {
        let field = e.to_string().split('`').nth(1).unwrap_or("body").to_string();
        ApiError(CampaignError::field(&field, e.to_string()))
    })
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, CampaignError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError(CampaignError::Storage(std::io::Error::other(e.to_string()))))?
        .map_err(ApiError)
}

async fn create(State(svc): State<Arc<CampaignService>>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateSession = parse(&body)?;
    let doc = blocking(move || svc.create(req)).await?;
    Ok((StatusCode::CREATED, Json(doc)).into_response())
}

async fn list(State(svc): State<Arc<CampaignService>>) -> Json<Vec<crate::SessionSummary>> {
    Json(svc.list())
}

async fn show(State(svc): State<Arc<CampaignService>>, Path(id): Path<String>) -> ApiResult<crate::SessionDoc> {
    Ok(Json(svc.get(&id)?))
}

async fn record(
    State(svc): State<Arc<CampaignService>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<crate::SessionDoc> {
    let input: BatchInput = parse(&body)?;
    Ok(Json(blocking(move || svc.record(&id, input)).await?))
}

async fn report(State(svc): State<Arc<CampaignService>>, Path(id): Path<String>) -> ApiResult<crate::SessionReport> {
    Ok(Json(svc.report(&id)?))
}

async fn recommendation(
    State(svc): State<Arc<CampaignService>>,
    Path(id): Path<String>,
) -> ApiResult<crate::RecommendationDoc> {
    Ok(Json(svc.recommendation(&id)?))
}

pub fn router(service: Arc<CampaignService>) -> Router {
    Router::new()
        .route("/sessions", post(create).get(list))
        .route("/sessions/{id}", get(show))
        .route("/sessions/{id}/batches", post(record))
        .route("/sessions/{id}/report", get(report))
        .route("/sessions/{id}/recommendation", get(recommendation))
        .with_state(service)
}

/// Router with permissive CORS, for a UI served from another origin.
pub fn router_with_cors(service: Arc<CampaignService>) -> Router {
    router(service).layer(CorsLayer::permissive())
}

pub async fn serve(service: Arc<CampaignService>, addr: SocketAddr, cors: bool) -> std::io::Result<()> {
    let app = if cors { router_with_cors(service) } else { router(service) };
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
