use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use prosync_core::model::RatingRecord;
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use crate::campaign::{Campaign, CampaignDefinition};
use crate::service::{Service, ServiceError};

/// Lets clients identify the annotator by header instead of query or body.
pub const ANNOTATOR_HEADER: &str = "x-annotator-id";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violations: Option<Vec<String>>,
}

pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                code: code.into(),
                message: message.into(),
                violations: None,
            },
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        let message = e.to_string();
        let (status, code, violations) = match e {
            ServiceError::UnknownCampaign(_) => (StatusCode::NOT_FOUND, "unknown_campaign", None),
            ServiceError::InvalidDefinition(v) => (StatusCode::BAD_REQUEST, "invalid_definition", Some(v)),
            ServiceError::DuplicateCampaign(_) => (StatusCode::CONFLICT, "duplicate_campaign", None),
            ServiceError::NotCurrentTask => (StatusCode::CONFLICT, "not_current_task", None),
            ServiceError::DuplicateSubmission => (StatusCode::CONFLICT, "duplicate_submission", None),
            ServiceError::ValidationFailed(v) => (
                StatusCode::UNPROCESSABLE_ENTITY,
                "validation_failed",
                Some(v.iter().map(ToString::to_string).collect()),
            ),
            ServiceError::Corrupt { .. } | ServiceError::Io(_) => {
                tracing::error!(error = %message, "storage failure");
                (StatusCode::INTERNAL_SERVER_ERROR, "storage_error", None)
            }
        };
        ApiError {
            status,
            body: ErrorBody {
                code: code.into(),
                message,
                violations,
            },
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Serialize, Deserialize)]
pub struct Created {
    pub campaign_id: String,
    pub created: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CampaignView {
    pub campaign: Campaign,
    pub accepted_records: usize,
    pub items_complete: usize,
}

#[derive(Debug, Deserialize)]
struct NextQuery {
    annotator: Option<String>,
}

fn header_annotator(headers: &HeaderMap) -> ApiResult<Option<String>> {
    headers
        .get(ANNOTATOR_HEADER)
        .map(|v| {
            v.to_str()
                .map(str::to_string)
                .map_err(|_| ApiError::bad_request("annotator header is not valid text"))
        })
        .transpose()
}

async fn create_campaign(
    State(svc): State<Arc<Service>>,
    body: Result<Json<CampaignDefinition>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<Created>)> {
    let Json(def) = body?;
    let (campaign, created) = svc.create_campaign(def).await?;
    let status = if created { StatusCode::CREATED } else { StatusCode::OK };
    Ok((
        status,
        Json(Created {
            campaign_id: campaign.campaign_id.clone(),
            created,
        }),
    ))
}

async fn list_campaigns(State(svc): State<Arc<Service>>) -> Json<Vec<String>> {
    Json(svc.campaign_ids())
}

async fn get_campaign(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
) -> ApiResult<Json<CampaignView>> {
    let snap = svc.snapshot(&id)?;
    Ok(Json(CampaignView {
        campaign: (*snap.campaign).clone(),
        accepted_records: snap.records.len(),
        items_complete: snap.items_complete(),
    }))
}

async fn next_task(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    Query(q): Query<NextQuery>,
    headers: HeaderMap,
) -> ApiResult<Response> {
    let annotator = match (q.annotator, header_annotator(&headers)?) {
        (Some(a), Some(h)) if a != h => {
            return Err(ApiError::bad_request("annotator query and header disagree"))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(ApiError::bad_request("missing annotator")),
    };
    if annotator.is_empty() {
        return Err(ApiError::bad_request("empty annotator id"));
    }
    Ok(Json(svc.next_task(&id, &annotator)?).into_response())
}

async fn submit(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Result<Json<RatingRecord>, JsonRejection>,
) -> ApiResult<Response> {
    let Json(record) = body?;
    if let Some(h) = header_annotator(&headers)? {
        if h != record.annotator_id {
            return Err(ApiError::bad_request("annotator header and record disagree"));
        }
    }
    if record.annotator_id.is_empty() {
        return Err(ApiError::bad_request("empty annotator id"));
    }
    Ok(Json(svc.submit(&id, record).await?).into_response())
}

async fn export(State(svc): State<Arc<Service>>, Path(id): Path<String>) -> ApiResult<Response> {
    let body = svc.export(&id)?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response())
}

/// The full API. Audio under `audio_dir` is served at `/audio/...` with
/// range-request support.
pub fn router(service: Arc<Service>, audio_dir: impl Into<PathBuf>) -> Router {
    Router::new()
        .route("/campaigns", post(create_campaign).get(list_campaigns))
        .route("/campaigns/{id}", get(get_campaign))
        .route("/campaigns/{id}/next", get(next_task))
        .route("/campaigns/{id}/submit", post(submit))
        .route("/campaigns/{id}/export", get(export))
        .nest_service("/audio", ServeDir::new(audio_dir.into()))
        .with_state(service)
}

pub async fn serve(listener: tokio::net::TcpListener, app: Router) -> std::io::Result<()> {
    axum::serve(listener, app).await
}
