//! Request handlers. Request and response bodies are JSON except for the
//! event stream (newline-delimited JSON) and renders (PNG or SVG bytes).

use std::collections::HashMap;
use std::convert::Infallible;
use std::sync::Arc;
use std::time::Duration;

use altcanvas_core::engine::{Command, Mode};
use altcanvas_core::feedback::StreamRecord;
use altcanvas_core::genai::BackendKind;
use altcanvas_core::persist;
use altcanvas_core::render::{self, EdgeAlgorithm, ExportFormat, RenderKind, RenderRequest};
use altcanvas_core::scene::{CanvasConfig, ImageStyle};
use axum::body::{Body, Bytes};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::ApiError;
use crate::sessions::{Registry, Session, Submitted};
use crate::AppState;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/commands", post(submit_commands))
        .route("/sessions/{id}/events", get(event_stream))
        .route("/sessions/{id}/render", get(get_render))
        .route("/sessions/{id}/settings", put(put_settings))
        .with_state(state)
}

fn parse_json<T: serde::de::DeserializeOwned>(body: &Bytes, malformed: fn(String) -> ApiError) -> Result<T, ApiError> {
    if body.is_empty() {
        return serde_json::from_slice(b"{}").map_err(|e| malformed(e.to_string()));
    }
    serde_json::from_slice(body).map_err(|e| malformed(e.to_string()))
}

async fn healthz(State(app): State<AppState>) -> Json<Value> {
    Json(json!({ "status": "ok", "sessions": app.registry.len() }))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    width: Option<i64>,
    height: Option<i64>,
    image_style: Option<ImageStyle>,
    speech_rate: Option<u8>,
    backend: Option<BackendKind>,
    seed: Option<u64>,
}

#[derive(Debug, Serialize)]
struct SessionView {
    session_id: String,
    created_at: String,
    updated_at: String,
    backend: BackendKind,
    seed: u64,
    state_digest: String,
    next_client_seq: u64,
    next_event_seq: u64,
    session: Value,
}

async fn view(session: &Session) -> SessionView {
    let data = session.data.lock().await;
    let bytes = persist::to_bytes(&data.state);
    SessionView {
        session_id: session.id.clone(),
        created_at: data.meta.created_at.to_rfc3339(),
        updated_at: data.meta.updated_at.to_rfc3339(),
        backend: data.meta.backend,
        seed: data.state.seed,
        state_digest: altcanvas_core::store::content_hash(&bytes),
        next_client_seq: data.meta.next_client_seq,
        next_event_seq: data.records.len() as u64,
        session: serde_json::from_slice(&bytes).expect("session files are JSON"),
    }
}

async fn create_session(State(app): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateRequest = parse_json(&body, ApiError::BadRequest)?;
    let defaults = CanvasConfig::default();
    let config = CanvasConfig {
        width: req.width.unwrap_or(defaults.width),
        height: req.height.unwrap_or(defaults.height),
        image_style: req.image_style.unwrap_or(defaults.image_style),
        speech_rate: req.speech_rate.unwrap_or(defaults.speech_rate),
    };
    let session = app
        .registry
        .create(config, req.backend.unwrap_or(BackendKind::Mock), req.seed.unwrap_or(0))?;
    Ok((StatusCode::CREATED, Json(view(&session).await)).into_response())
}

async fn get_session(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let session = app.registry.get(&id)?;
    Ok(Json(view(&session).await))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubmitRequest {
    #[serde(default)]
    client_seq: Option<u64>,
    commands: Vec<Command>,
}

#[derive(Debug, Serialize)]
struct SubmitResponse {
    events: Vec<StreamRecord>,
    state_digest: String,
    pending: bool,
    queued: bool,
}

fn submitted_response(s: Submitted) -> Response {
    let status = if s.pending || s.queued {
        StatusCode::ACCEPTED
    } else {
        StatusCode::OK
    };
    let body = SubmitResponse {
        events: s.records,
        state_digest: s.digest,
        pending: s.pending,
        queued: s.queued,
    };
    (status, Json(body)).into_response()
}

async fn submit_commands(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let session = app.registry.get(&id)?;
    let req: SubmitRequest = parse_json(&body, ApiError::MalformedCommand)?;
    let submitted = app.registry.submit(&session, req.client_seq, req.commands).await?;
    Ok(submitted_response(submitted))
}

async fn put_settings(State(app): State<AppState>, Path(id): Path<String>, body: Bytes) -> Result<Response, ApiError> {
    let session = app.registry.get(&id)?;
    let config: CanvasConfig = parse_json(&body, ApiError::BadRequest)?;
    let submitted = app.registry.update_settings(&session, config).await?;
    Ok(submitted_response(submitted))
}

#[derive(Debug, Deserialize)]
struct EventQuery {
    #[serde(default)]
    from: u64,
    /// `false` returns the records so far and closes the stream.
    #[serde(default = "yes")]
    follow: bool,
}

fn yes() -> bool {
    true
}

struct StreamCursor {
    session: Arc<Session>,
    rx: tokio::sync::watch::Receiver<u64>,
    next: u64,
    follow: bool,
    heartbeat: Duration,
    done: bool,
}

async fn next_chunk(mut c: StreamCursor) -> Option<(Result<Bytes, Infallible>, StreamCursor)> {
    if c.done {
        return None;
    }
    loop {
        let lines: String = {
            let data = c.session.data.lock().await;
            let start = (c.next as usize).min(data.records.len());
            let lines = data.records[start..].iter().map(StreamRecord::to_line).collect();
            c.next = c.next.max(data.records.len() as u64);
            lines
        };
        if !lines.is_empty() {
            return Some((Ok(Bytes::from(lines)), c));
        }
        if !c.follow {
            return None;
        }
        match tokio::time::timeout(c.heartbeat, c.rx.changed()).await {
            Ok(Ok(())) => continue,
            Ok(Err(_)) => return None,
            Err(_) => {
                let line = format!("{}\n", json!({ "type": "heartbeat", "next_seq": c.next }));
                return Some((Ok(Bytes::from(line)), c));
            }
        }
    }
}

async fn event_stream(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<EventQuery>,
) -> Result<Response, ApiError> {
    let session = app.registry.get(&id)?;
    let rx = session.subscribe();
    let cursor = StreamCursor {
        session,
        rx,
        next: q.from,
        follow: q.follow,
        heartbeat: app.heartbeat,
        done: false,
    };
    let stream = futures::stream::unfold(cursor, next_chunk);
    Ok((
        [
            (header::CONTENT_TYPE, "application/x-ndjson"),
            (header::CACHE_CONTROL, "no-cache"),
        ],
        Body::from_stream(stream),
    )
        .into_response())
}

fn parse_param<T: std::str::FromStr>(q: &HashMap<String, String>, key: &str) -> Result<Option<T>, ApiError>
where
    T::Err: std::fmt::Display,
{
    q.get(key)
        .map(|v| v.parse::<T>().map_err(|e| ApiError::BadRequest(format!("{key}: {e}"))))
        .transpose()
}

/// Builds a render request from query parameters: `kind`, `format`,
/// `instruction`, `edges` (`canny` or `sobel`), `threshold`, `low`, `high`
/// and `sigma`.
fn render_request(q: &HashMap<String, String>) -> Result<RenderRequest, ApiError> {
    let kind: RenderKind = parse_param(q, "kind")?.unwrap_or(RenderKind::Snapshot);
    let mut req = RenderRequest::new(kind);
    req.format = parse_param::<ExportFormat>(q, "format")?;
    if let Some(instruction) = q.get("instruction").filter(|s| !s.trim().is_empty()) {
        req.instruction = instruction.clone();
    }
    if let Some(a) = parse_param::<EdgeAlgorithm>(q, "edges")? {
        req.edges.algorithm = a;
    }
    if let Some(t) = parse_param::<u8>(q, "threshold")? {
        req.edges.threshold = t;
    }
    if let Some(low) = parse_param::<u8>(q, "low")? {
        req.edges.canny_low = low;
    }
    if let Some(high) = parse_param::<u8>(q, "high")? {
        req.edges.canny_high = high;
    }
    if let Some(sigma) = parse_param::<f64>(q, "sigma")? {
        req.edges.gaussian_sigma = sigma;
    }
    Ok(req)
}

async fn get_render(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> Result<Response, ApiError> {
    let session = app.registry.get(&id)?;
    let req = render_request(&q)?;
    let scene = {
        let data = session.data.lock().await;
        if matches!(data.state.mode, Mode::AwaitBackend { .. }) && req.kind == RenderKind::Color {
            return Err(ApiError::Conflict("a backend request is still running".into()));
        }
        data.state.scene.clone()
    };
    let store = Arc::clone(app.registry.store());
    let backend = Registry::backend_of(&session);
    let out = tokio::task::spawn_blocking(move || render::render(&scene, store.as_ref(), backend.as_ref(), &req))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
        .map_err(|e| match e {
            render::RenderError::InvalidThresholds { .. }
            | render::RenderError::InvalidSigma(_)
            | render::RenderError::UnsupportedFormat(_) => ApiError::BadRequest(e.to_string()),
            other => ApiError::RenderFailed(other.to_string()),
        })?;
    let mut response = (
        [(header::CONTENT_TYPE, out.format.media_type())],
        out.bytes,
    )
        .into_response();
    if !out.warnings.is_empty() {
        if let Ok(v) = out.warnings.join("; ").parse() {
            response.headers_mut().insert("x-render-warnings", v);
        }
    }
    Ok(response)
}
