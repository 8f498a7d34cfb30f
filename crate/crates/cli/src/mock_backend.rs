// SPDX-License-Identifier: Apache-2.0

//! Model-server side of the wire protocol, backed by any in-process
//! backend. Lets the HTTP clients be exercised end to end without a model.

use std::sync::Arc;

use axum::extract::{DefaultBodyLimit, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::{Json, Router};
use serde_json::json;
use sightline_core::gateway::wire::{self, DescribeRequest, SegmentRequest};
use sightline_core::{Describer, Error, Segmenter};

#[derive(Clone)]
pub struct Backends {
    pub segmenter: Arc<dyn Segmenter>,
    pub describer: Arc<dyn Describer>,
}

pub fn router(backends: Backends) -> Router {
    Router::new()
        .route("/segment", post(segment))
        .route("/describe", post(describe))
        .layer(DefaultBodyLimit::max(64 << 20))
        .with_state(backends)
}

fn failure(e: Error) -> Response {
    let status = match e {
        Error::InvalidInput(_) | Error::Image(_) | Error::Json(_) => StatusCode::BAD_REQUEST,
        Error::BackendUnavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    };
    (status, Json(json!({ "error": e.to_string() }))).into_response()
}

async fn segment(State(b): State<Backends>, Json(req): Json<SegmentRequest>) -> Response {
    let out = tokio::task::spawn_blocking(move || wire::serve_segment(b.segmenter.as_ref(), &req)).await;
    match out {
        Ok(Ok(resp)) => Json(resp).into_response(),
        Ok(Err(e)) => failure(e),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

async fn describe(State(b): State<Backends>, Json(req): Json<DescribeRequest>) -> Response {
    let out = tokio::task::spawn_blocking(move || wire::serve_describe(b.describer.as_ref(), &req)).await;
    match out {
        Ok(Ok(resp)) => Json(resp).into_response(),
        Ok(Err(e)) => failure(e),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}
