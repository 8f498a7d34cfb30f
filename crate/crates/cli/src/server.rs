// SPDX-License-Identifier: Apache-2.0

//! Session HTTP API.
//!
//! | route | body | reply |
//! |---|---|---|
//! | `GET /v1/healthz` | | `{"status":"ok"}` |
//! | `POST /v1/session` | | `201 {"session_id"}` |
//! | `DELETE /v1/session/{id}` | | `204` |
//! | `POST /v1/session/{id}/capture` | multipart `rgb` PNG, optional `depth` PNG | scene analysis |
//! | `POST /v1/session/{id}/touch` | `{"u","v"}` | touch response |
//! | `POST /v1/session/{id}/inspect` | `{"u","v"}` | local description, with `text` |
//!
//! Errors are `{"error": kind, "message": text}`.

use std::sync::Arc;
use std::time::Duration;

use axum::extract::multipart::Multipart;
use axum::extract::rejection::JsonRejection;
use axum::extract::{DefaultBodyLimit, Path, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sightline_core::{DepthImage, Error, RgbImage, SceneService, SessionStore};
use uuid::Uuid;

pub struct AppState {
    pub service: SceneService,
    pub store: SessionStore,
    pub auth_token: Option<String>,
}

impl AppState {
    pub fn new(service: SceneService, session_ttl: Duration, auth_token: Option<String>) -> Self {
        Self { service, store: SessionStore::new(session_ttl), auth_token }
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> Self {
        Self { status, kind, message: message.into() }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_input", message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let (status, kind) = match &e {
            Error::InvalidInput(_) | Error::Image(_) | Error::Json(_) => (StatusCode::BAD_REQUEST, "invalid_input"),
            Error::SessionNotFound(_) => (StatusCode::NOT_FOUND, "session_not_found"),
            Error::NoAnalysis => (StatusCode::CONFLICT, "no_analysis"),
            Error::NoObject { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "no_object"),
            Error::BackendUnavailable(_) => (StatusCode::SERVICE_UNAVAILABLE, "backend_unavailable"),
            Error::Protocol(_) | Error::EmptyResponse => (StatusCode::BAD_GATEWAY, "backend_protocol"),
            Error::InvalidConfig(_) | Error::Io(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        Self::new(status, kind, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            tracing::warn!(status = %self.status, "{}", self.message);
        }
        (self.status, Json(json!({ "error": self.kind, "message": self.message }))).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Point {
    pub u: f64,
    pub v: f64,
}

pub fn router(state: Arc<AppState>, max_upload_bytes: usize) -> Router {
    let sessions = Router::new()
        .route("/v1/session", post(create_session))
        .route("/v1/session/{id}", delete(delete_session))
        .route("/v1/session/{id}/capture", post(capture))
        .route("/v1/session/{id}/touch", post(touch))
        .route("/v1/session/{id}/inspect", post(inspect))
        .route_layer(middleware::from_fn_with_state(state.clone(), require_token));
    Router::new()
        .route("/v1/healthz", get(|| async { Json(json!({ "status": "ok" })) }))
        .merge(sessions)
        .layer(DefaultBodyLimit::max(max_upload_bytes))
        .with_state(state)
}

async fn require_token(State(state): State<Arc<AppState>>, req: Request, next: Next) -> Response {
    if let Some(token) = &state.auth_token {
        let ok = req
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .is_some_and(|t| t == token);
        if !ok {
            return ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing or wrong bearer token")
                .into_response();
        }
    }
    next.run(req).await
}

fn session_id(raw: &str) -> ApiResult<Uuid> {
    raw.parse().map_err(|_| ApiError::bad_request(format!("malformed session id {raw:?}")))
}

fn point(body: Result<Json<Point>, JsonRejection>) -> ApiResult<Point> {
    body.map(|Json(p)| p).map_err(|e| ApiError::bad_request(e.body_text()))
}

/// Runs blocking pipeline work (backend calls, session locks) off the
/// async workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> sightline_core::Result<T> + Send + 'static) -> ApiResult<T> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(ApiError::from),
        Err(e) => Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())),
    }
}

async fn create_session(State(state): State<Arc<AppState>>) -> impl IntoResponse {
    (StatusCode::CREATED, Json(json!({ "session_id": state.store.create() })))
}

async fn delete_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    let id = session_id(&id)?;
    if state.store.remove(id) {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(Error::SessionNotFound(id).into())
    }
}

async fn capture(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    mut form: Multipart,
) -> ApiResult<Response> {
    let id = session_id(&id)?;
    let (mut rgb, mut depth) = (None, None);
    while let Some(field) = form.next_field().await.map_err(|e| ApiError::bad_request(e.body_text()))? {
        let name = field.name().unwrap_or_default().to_string();
        let bytes = field.bytes().await.map_err(|e| ApiError::bad_request(e.body_text()))?;
        match name.as_str() {
            "rgb" => rgb = Some(bytes),
            "depth" => depth = Some(bytes),
            other => return Err(ApiError::bad_request(format!("unexpected form field {other:?}"))),
        }
    }
    let rgb = rgb.ok_or_else(|| ApiError::bad_request("missing form field \"rgb\""))?;
    let analysis = blocking(move || {
        let rgb = RgbImage::from_encoded(&rgb)?;
        let depth = depth.map(|d| DepthImage::from_png(&d)).transpose()?;
        let session = state.store.get(id)?;
        let mut session = session.lock().expect("session lock");
        state.service.capture(&mut session, rgb, depth)
    })
    .await?;
    Ok(Json(&*analysis).into_response())
}

async fn touch(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<Point>, JsonRejection>,
) -> ApiResult<Response> {
    let (id, p) = (session_id(&id)?, point(body)?);
    let resp = blocking(move || {
        let session = state.store.get(id)?;
        let mut session = session.lock().expect("session lock");
        state.service.touch(&mut session, p.u, p.v)
    })
    .await?;
    Ok(Json(resp).into_response())
}

async fn inspect(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<Point>, JsonRejection>,
) -> ApiResult<Response> {
    let (id, p) = (session_id(&id)?, point(body)?);
    let resp = blocking(move || {
        let session = state.store.get(id)?;
        let session = session.lock().expect("session lock");
        state.service.inspect(&session, p.u, p.v)
    })
    .await?;
    Ok(Json(resp).into_response())
}
