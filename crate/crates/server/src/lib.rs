// SPDX-License-Identifier: Apache-2.0

//! HTTP transport for the collection service.
//!
//! Every message endpoint takes and returns JSON in the wire format of
//! [`ambiguity_core::study::api`]. Errors come back as
//! `{"error": code, "message": text}` with a matching status code.

use std::net::SocketAddr;
use std::path::{Component, Path, PathBuf};
use std::sync::{Arc, Mutex};

use ambiguity_core::study::api::{self, ErrorBody, Request};
use ambiguity_core::study::{StudyError, StudyService};
use axum::body::{Body, Bytes};
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Deserialize;

struct AppState {
    service: Mutex<StudyService>,
    assets: PathBuf,
}

type Shared = Arc<AppState>;

pub fn status_for(code: &str) -> StatusCode {
    match code {
        "bad_request" => StatusCode::BAD_REQUEST,
        "unknown_session" | "not_found" => StatusCode::NOT_FOUND,
        "session_not_active" | "out_of_order_submission" | "duplicate_submission" => StatusCode::CONFLICT,
        "payload_mismatch" => StatusCode::UNPROCESSABLE_ENTITY,
        "study_full" => StatusCode::SERVICE_UNAVAILABLE,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

fn error_response(code: &str, message: String) -> axum::response::Response {
    let body = ErrorBody {
        error: code.to_string(),
        message,
    };
    (status_for(code), Json(body)).into_response()
}

fn study_error(err: &StudyError) -> axum::response::Response {
    if matches!(err, StudyError::Io { .. } | StudyError::CorruptLog { .. }) {
        log::error!("{err}");
    }
    error_response(err.code(), err.to_string())
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, Box<axum::response::Response>> {
    serde_json::from_slice(body).map_err(|e| Box::new(error_response("bad_request", e.to_string())))
}

fn dispatch(state: &AppState, request: Request) -> axum::response::Response {
    let mut service = state.service.lock().unwrap_or_else(|poisoned| poisoned.into_inner());
    match api::handle(&mut service, request) {
        Ok(response) => Json(response).into_response(),
        Err(err) => study_error(&err),
    }
}

async fn message(State(state): State<Shared>, body: Bytes) -> axum::response::Response {
    match parse::<Request>(&body) {
        Ok(request) => dispatch(&state, request),
        Err(resp) => *resp,
    }
}

#[derive(Deserialize)]
struct CreateSessionBody {
    participant_id: String,
}

#[derive(Deserialize)]
struct SessionBody {
    session_id: String,
}

#[derive(Deserialize)]
struct SubmitBody {
    session_id: String,
    trial_index: usize,
    payload: ambiguity_core::study::TrialPayload,
}

async fn create_session(State(state): State<Shared>, body: Bytes) -> axum::response::Response {
    match parse::<CreateSessionBody>(&body) {
        Ok(b) => dispatch(
            &state,
            Request::CreateSession {
                participant_id: b.participant_id,
            },
        ),
        Err(resp) => *resp,
    }
}

async fn next_trial(State(state): State<Shared>, body: Bytes) -> axum::response::Response {
    match parse::<SessionBody>(&body) {
        Ok(b) => dispatch(
            &state,
            Request::NextTrial {
                session_id: b.session_id,
            },
        ),
        Err(resp) => *resp,
    }
}

async fn submit_trial(State(state): State<Shared>, body: Bytes) -> axum::response::Response {
    match parse::<SubmitBody>(&body) {
        Ok(b) => dispatch(
            &state,
            Request::SubmitTrial {
                session_id: b.session_id,
                trial_index: b.trial_index,
                payload: b.payload,
            },
        ),
        Err(resp) => *resp,
    }
}

async fn export(State(state): State<Shared>) -> axum::response::Response {
    dispatch(&state, Request::Export)
}

async fn health() -> &'static str {
    "ok"
}

/// Resolves a request path under `root`, refusing anything that could
/// escape it.
pub fn asset_path(root: &Path, requested: &str) -> Option<PathBuf> {
    let rel = Path::new(requested);
    if requested.is_empty() || !rel.components().all(|c| matches!(c, Component::Normal(_))) {
        return None;
    }
    Some(root.join(rel))
}

fn content_type(path: &Path) -> &'static str {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("png") => "image/png",
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("gif") => "image/gif",
        Some("webp") => "image/webp",
        Some("svg") => "image/svg+xml",
        Some("html") => "text/html; charset=utf-8",
        Some("css") => "text/css",
        Some("js") => "text/javascript",
        Some("json") => "application/json",
        _ => "application/octet-stream",
    }
}

async fn asset(State(state): State<Shared>, UrlPath(requested): UrlPath<String>) -> axum::response::Response {
    let Some(path) = asset_path(&state.assets, &requested) else {
        return error_response("not_found", format!("no asset {requested:?}"));
    };
    match tokio::fs::read(&path).await {
        Ok(bytes) => ([(header::CONTENT_TYPE, content_type(&path))], Body::from(bytes)).into_response(),
        Err(_) => error_response("not_found", format!("no asset {requested:?}")),
    }
}

/// Routes: `POST /api` with a tagged request, one `POST /api/<type>` per
/// request type, `GET /api/export`, `GET /assets/<path>` and `GET /health`.
pub fn router(service: StudyService, assets: impl Into<PathBuf>) -> Router {
    let state = Arc::new(AppState {
        service: Mutex::new(service),
        assets: assets.into(),
    });
    Router::new()
        .route("/api", post(message))
        .route("/api/create-session", post(create_session))
        .route("/api/next-trial", post(next_trial))
        .route("/api/submit-trial", post(submit_trial))
        .route("/api/export", get(export).post(export))
        .route("/assets/{*path}", get(asset))
        .route("/health", get(health))
        .with_state(state)
}

/// Serves `router` on `addr` until the process is stopped.
pub async fn serve(router: Router, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router).await
}
