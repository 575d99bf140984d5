#![allow(dead_code)]

use std::path::PathBuf;
use std::time::Duration;

use altcanvas_service::{router, AppState, ServiceConfig};
use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

pub fn config(data_dir: Option<PathBuf>, heartbeat: Duration) -> ServiceConfig {
    ServiceConfig {
        data_dir,
        bind: "127.0.0.1:0".parse().unwrap(),
        remote: None,
        heartbeat,
    }
}

pub fn app() -> Router {
    app_with(config(None, Duration::from_secs(15)))
}

pub fn app_with(config: ServiceConfig) -> Router {
    router(AppState::open(&config).unwrap())
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes) = call_raw(app, method, uri, body.map(|b| b.to_string())).await;
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

pub async fn call_raw(app: &Router, method: Method, uri: &str, body: Option<String>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(Body::from).unwrap_or_else(Body::empty))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

pub async fn create(app: &Router, body: Value) -> String {
    let (status, v) = call(app, Method::POST, "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v["session_id"].as_str().unwrap().to_string()
}

pub async fn submit(app: &Router, id: &str, client_seq: Option<u64>, commands: Value) -> (StatusCode, Value) {
    let mut body = json!({ "commands": commands });
    if let Some(n) = client_seq {
        body["client_seq"] = json!(n);
    }
    call(app, Method::POST, &format!("/sessions/{id}/commands"), Some(body)).await
}

pub async fn session(app: &Router, id: &str) -> Value {
    let (status, v) = call(app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    v
}

/// Polls until no backend request is outstanding.
pub async fn wait_idle(app: &Router, id: &str) -> Value {
    for _ in 0..500 {
        let v = session(app, id).await;
        if v["session"]["mode"]["mode"] != "await_backend" {
            return v;
        }
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    panic!("session {id} never left await_backend");
}

/// Opens an event stream and collects lines until `done` says stop.
pub async fn read_stream(app: &Router, uri: &str, mut done: impl FnMut(&[Value]) -> bool) -> Vec<Value> {
    let req = Request::builder().uri(uri).body(Body::empty()).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    assert_eq!(resp.headers()["content-type"], "application/x-ndjson");
    let mut body = resp.into_body();
    let mut buf = String::new();
    let mut lines = Vec::new();
    while !done(&lines) {
        let frame = tokio::time::timeout(Duration::from_secs(10), body.frame())
            .await
            .expect("stream stalled");
        let Some(frame) = frame else { break };
        let Ok(data) = frame.unwrap().into_data() else { continue };
        buf.push_str(std::str::from_utf8(&data).unwrap());
        while let Some(i) = buf.find('\n') {
            let line: String = buf.drain(..=i).collect();
            lines.push(serde_json::from_str(line.trim_end()).unwrap());
        }
    }
    lines
}
