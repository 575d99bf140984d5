use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("no session with id `{0}`")]
    UnknownSession(String),
    #[error("malformed command: {0}")]
    MalformedCommand(String),
    #[error("invalid request: {0}")]
    BadRequest(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{0}")]
    Conflict(String),
    #[error("render failed: {0}")]
    RenderFailed(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl ApiError {
    pub fn code(&self) -> &'static str {
        match self {
            ApiError::UnknownSession(_) => "unknown_session",
            ApiError::MalformedCommand(_) => "malformed_command",
            ApiError::BadRequest(_) => "bad_request",
            ApiError::InvalidConfig(_) => "invalid_config",
            ApiError::Conflict(_) => "conflict",
            ApiError::RenderFailed(_) => "render_failed",
            ApiError::Internal(_) => "internal",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ApiError::MalformedCommand(_) | ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::InvalidConfig(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Conflict(_) => StatusCode::CONFLICT,
            ApiError::RenderFailed(_) | ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": self.code(), "message": self.to_string() });
        (self.status(), Json(body)).into_response()
    }
}

impl From<altcanvas_core::persist::PersistError> for ApiError {
    fn from(e: altcanvas_core::persist::PersistError) -> Self {
        ApiError::Internal(e.to_string())
    }
}
