//! Generative backend: image generation, background removal, descriptions
//! and image chat.
//!
//! [`GenBackend`] is implemented by [`MockBackend`], a pure function of its
//! inputs and seed, and by [`RemoteBackend`], a thin HTTP adapter.

pub mod mock;
pub mod remote;
pub mod rewrite;
pub mod templates;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mock::MockBackend;
pub use remote::{RemoteBackend, RemoteConfig, RetryPolicy};
pub use rewrite::{rewrite_prompt, ObjectExtractor, PatternExtractor, RewrittenPrompt};

use crate::scene::{ImageStyle, Scene, SceneObject};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("the transcript is empty")]
    EmptyTranscript,
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("the request was rejected: {0}")]
    ContentRejected(String),
    #[error("{stage} timed out")]
    Timeout { stage: String },
    #[error("malformed backend response: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Mock,
    Remote,
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mock" => Ok(BackendKind::Mock),
            "remote" => Ok(BackendKind::Remote),
            other => Err(format!("unknown backend `{other}` (expected mock or remote)")),
        }
    }
}

impl BackendKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::Mock => "mock",
            BackendKind::Remote => "remote",
        }
    }
}

/// What a request asks the backend to do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    Image,
    RemoveBackground,
    Describe,
    GlobalDescribe,
    Chat,
    BackgroundRender,
}

/// Request body sent to a remote backend.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenRequest {
    pub kind: GenKind,
    pub model: String,
    pub prompt: String,
    pub style: ImageStyle,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_base64: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question: Option<String>,
    pub n: u32,
    pub quality: String,
    pub image_style: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenFailure {
    pub code: String,
    pub message: String,
}

/// Response body from a remote backend.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenResult {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_base64: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<GenFailure>,
}

pub trait GenBackend: Send + Sync {
    /// Generates one image for the rewritten prompt, as PNG bytes.
    fn generate_image(&self, prompt: &RewrittenPrompt, style: ImageStyle) -> Result<Vec<u8>, GenError>;

    /// Makes the background of a generated image transparent.
    fn remove_background(&self, png: &[u8]) -> Result<Vec<u8>, GenError>;

    /// Short description of a freshly generated image.
    fn describe_image(&self, png: &[u8], subject: &str, style: ImageStyle) -> Result<String, GenError>;

    /// One-line description of the whole canvas from its snapshot.
    fn describe_canvas(&self, scene: &Scene, snapshot_png: &[u8]) -> Result<String, GenError>;

    /// Answers a spoken question about one object.
    fn answer_question(&self, obj: &SceneObject, image_png: Option<&[u8]>, question: &str) -> Result<String, GenError>;

    /// Re-renders a canvas snapshot with a new background, as PNG bytes.
    fn render_background(&self, snapshot_png: &[u8], instruction: &str) -> Result<Vec<u8>, GenError>;
}

/// Everything produced for one generation request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedObject {
    pub name: String,
    pub png: Vec<u8>,
    pub description: String,
    pub prompt: RewrittenPrompt,
}

/// Rewrite, generate, remove the background, describe. Any failure aborts
/// the whole pipeline so callers never see a half-finished object.
pub fn generate_object(backend: &dyn GenBackend, transcript: &str, style: ImageStyle) -> Result<GeneratedObject, GenError> {
    let prompt = rewrite_prompt(transcript, style)?;
    let raw = backend.generate_image(&prompt, style)?;
    let png = backend.remove_background(&raw)?;
    let name = prompt.name();
    let description = backend.describe_image(&png, &name, style)?;
    Ok(GeneratedObject {
        name,
        png,
        description,
        prompt,
    })
}

/// Spoken canvas description. Backend failures fall back to the rule-based
/// summary, announced as such.
pub fn describe_canvas(backend: &dyn GenBackend, scene: &Scene, snapshot_png: &[u8]) -> String {
    match backend.describe_canvas(scene, snapshot_png) {
        Ok(text) => text,
        Err(_) => format!(
            "Offline description: {}",
            crate::feedback::fallback_global_description(scene)
        ),
    }
}

pub fn answer_question(
    backend: &dyn GenBackend,
    obj: &SceneObject,
    image_png: Option<&[u8]>,
    question: &str,
) -> Result<String, GenError> {
    if question.trim().is_empty() {
        return Err(GenError::EmptyTranscript);
    }
    backend.answer_question(obj, image_png, question.trim())
}
