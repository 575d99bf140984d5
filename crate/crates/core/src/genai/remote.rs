//! HTTP adapter for a hosted generative service.
//!
//! Each stage is one JSON `POST {endpoint}/v1/{stage}` carrying a
//! [`GenRequest`] and answered with a [`GenResult`]. Transient failures
//! (connection errors, 429, 5xx) are retried per [`RetryPolicy`]; 400, 403
//! and 422 are content rejections and are never retried.

use std::time::Duration;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use reqwest::blocking::Client;
use reqwest::StatusCode;

use super::templates::{fill, PromptTemplates};
use super::{GenBackend, GenError, GenKind, GenRequest, GenResult, RewrittenPrompt};
use crate::feedback::fallback_global_description;
use crate::scene::{ImageStyle, Scene, SceneObject};

pub const ENV_URL: &str = "ALTCANVAS_REMOTE_URL";
pub const ENV_API_KEY: &str = "ALTCANVAS_API_KEY";
pub const ENV_MODEL: &str = "ALTCANVAS_MODEL";
pub const ENV_TIMEOUT: &str = "ALTCANVAS_STAGE_TIMEOUT_SECS";

pub const DEFAULT_MODEL: &str = "dall-e-3";
pub const DEFAULT_STAGE_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetryPolicy {
    /// Delay before each retry; its length is the retry count.
    pub backoff: Vec<Duration>,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            backoff: vec![Duration::from_secs(1), Duration::from_secs(4)],
        }
    }
}

impl RetryPolicy {
    pub fn none() -> Self {
        RetryPolicy { backoff: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub api_key: Option<String>,
    pub model: String,
    pub stage_timeout: Duration,
    pub retry: RetryPolicy,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        RemoteConfig {
            endpoint: endpoint.into().trim_end_matches('/').to_string(),
            api_key: None,
            model: DEFAULT_MODEL.to_string(),
            stage_timeout: DEFAULT_STAGE_TIMEOUT,
            retry: RetryPolicy::default(),
        }
    }

    /// Reads the endpoint and credentials from the environment. Returns
    /// `None` when no endpoint is configured.
    pub fn from_env() -> Option<Self> {
        let endpoint = std::env::var(ENV_URL).ok().filter(|s| !s.trim().is_empty())?;
        let mut config = RemoteConfig::new(endpoint.trim());
        config.api_key = std::env::var(ENV_API_KEY).ok().filter(|s| !s.is_empty());
        if let Ok(model) = std::env::var(ENV_MODEL) {
            if !model.trim().is_empty() {
                config.model = model.trim().to_string();
            }
        }
        if let Some(secs) = std::env::var(ENV_TIMEOUT).ok().and_then(|s| s.trim().parse::<u64>().ok()) {
            config.stage_timeout = Duration::from_secs(secs.max(1));
        }
        Some(config)
    }
}

pub struct RemoteBackend {
    config: RemoteConfig,
    templates: PromptTemplates,
    client: Client,
}

impl std::fmt::Debug for RemoteBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteBackend")
            .field("endpoint", &self.config.endpoint)
            .field("model", &self.config.model)
            .finish_non_exhaustive()
    }
}

fn stage_path(kind: GenKind) -> &'static str {
    match kind {
        GenKind::Image => "generate",
        GenKind::RemoveBackground => "remove-background",
        GenKind::Describe | GenKind::GlobalDescribe => "describe",
        GenKind::Chat => "chat",
        GenKind::BackgroundRender => "render",
    }
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Result<Self, GenError> {
        let client = Client::builder()
            .timeout(config.stage_timeout)
            .build()
            .map_err(|e| GenError::BackendUnavailable(e.to_string()))?;
        Ok(RemoteBackend {
            config,
            templates: PromptTemplates::default(),
            client,
        })
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    fn request(&self, kind: GenKind, prompt: String, style: ImageStyle) -> GenRequest {
        GenRequest {
            kind,
            model: self.config.model.clone(),
            prompt,
            style,
            image_base64: None,
            question: None,
            n: 1,
            quality: "hd".to_string(),
            image_style: "natural".to_string(),
        }
    }

    fn call(&self, req: &GenRequest) -> Result<GenResult, GenError> {
        let stage = stage_path(req.kind);
        let url = format!("{}/v1/{}", self.config.endpoint, stage);
        let mut last = GenError::BackendUnavailable(format!("{stage}: no attempt made"));
        for attempt in 0..=self.config.retry.backoff.len() {
            if attempt > 0 {
                std::thread::sleep(self.config.retry.backoff[attempt - 1]);
            }
            let mut builder = self.client.post(&url).json(req);
            if let Some(key) = &self.config.api_key {
                builder = builder.bearer_auth(key);
            }
            let response = match builder.send() {
                Ok(r) => r,
                Err(e) if e.is_timeout() => {
                    return Err(GenError::Timeout {
                        stage: stage.to_string(),
                    })
                }
                Err(e) => {
                    last = GenError::BackendUnavailable(format!("{stage}: {e}"));
                    continue;
                }
            };
            let status = response.status();
            if status.is_success() {
                let body: GenResult = response.json().map_err(|e| {
                    if e.is_timeout() {
                        GenError::Timeout {
                            stage: stage.to_string(),
                        }
                    } else {
                        GenError::Malformed(format!("{stage}: {e}"))
                    }
                })?;
                if let Some(failure) = body.error {
                    return Err(GenError::ContentRejected(failure.message));
                }
                return Ok(body);
            }
            let detail = response
                .json::<GenResult>()
                .ok()
                .and_then(|b| b.error)
                .map(|f| f.message)
                .unwrap_or_else(|| status.to_string());
            match status {
                StatusCode::BAD_REQUEST | StatusCode::FORBIDDEN | StatusCode::UNPROCESSABLE_ENTITY => {
                    return Err(GenError::ContentRejected(detail))
                }
                s if s == StatusCode::TOO_MANY_REQUESTS || s.is_server_error() => {
                    last = GenError::BackendUnavailable(format!("{stage}: {detail}"));
                }
                _ => return Err(GenError::BackendUnavailable(format!("{stage}: {detail}"))),
            }
        }
        Err(last)
    }

    fn image_of(result: GenResult, stage: &str) -> Result<Vec<u8>, GenError> {
        let encoded = result
            .image_base64
            .ok_or_else(|| GenError::Malformed(format!("{stage}: response has no image")))?;
        B64.decode(encoded.as_bytes())
            .map_err(|e| GenError::Malformed(format!("{stage}: {e}")))
    }

    fn text_of(result: GenResult, stage: &str) -> Result<String, GenError> {
        result
            .description
            .map(|d| d.trim().to_string())
            .filter(|d| !d.is_empty())
            .ok_or_else(|| GenError::Malformed(format!("{stage}: response has no text")))
    }

    /// Request body for a question about one object, with the chat prompt
    /// filled in.
    pub fn chat_request(&self, obj: &SceneObject, image_png: Option<&[u8]>, question: &str) -> GenRequest {
        let prompt = fill(&self.templates.chat, &[("voiceText", question)]);
        let mut req = self.request(GenKind::Chat, prompt, ImageStyle::Color);
        req.question = Some(question.to_string());
        req.image_base64 = image_png.map(|png| B64.encode(png));
        if req.image_base64.is_none() {
            req.prompt.push_str(&format!("\nImage: {}. {}", obj.name, obj.description));
        }
        req
    }
}

impl GenBackend for RemoteBackend {
    fn generate_image(&self, prompt: &RewrittenPrompt, style: ImageStyle) -> Result<Vec<u8>, GenError> {
        let req = self.request(GenKind::Image, prompt.final_prompt.clone(), style);
        Self::image_of(self.call(&req)?, "generate")
    }

    fn remove_background(&self, png: &[u8]) -> Result<Vec<u8>, GenError> {
        let mut req = self.request(GenKind::RemoveBackground, String::new(), ImageStyle::Tactile);
        req.image_base64 = Some(B64.encode(png));
        Self::image_of(self.call(&req)?, "remove-background")
    }

    fn describe_image(&self, png: &[u8], subject: &str, style: ImageStyle) -> Result<String, GenError> {
        let prompt = format!("Describe this image of {subject} in one short sentence.");
        let mut req = self.request(GenKind::Describe, prompt, style);
        req.image_base64 = Some(B64.encode(png));
        Self::text_of(self.call(&req)?, "describe")
    }

    fn describe_canvas(&self, scene: &Scene, snapshot_png: &[u8]) -> Result<String, GenError> {
        let listing = fallback_global_description(scene);
        let prompt = format!("{}\nObjects: {listing}", self.templates.global_description.trim_end());
        let mut req = self.request(GenKind::GlobalDescribe, prompt, scene.config.image_style);
        req.image_base64 = Some(B64.encode(snapshot_png));
        Self::text_of(self.call(&req)?, "describe")
    }

    fn answer_question(&self, obj: &SceneObject, image_png: Option<&[u8]>, question: &str) -> Result<String, GenError> {
        if question.trim().is_empty() {
            return Err(GenError::EmptyTranscript);
        }
        let req = self.chat_request(obj, image_png, question.trim());
        Self::text_of(self.call(&req)?, "chat")
    }

    fn render_background(&self, snapshot_png: &[u8], instruction: &str) -> Result<Vec<u8>, GenError> {
        let mut req = self.request(GenKind::BackgroundRender, instruction.to_string(), ImageStyle::Color);
        req.image_base64 = Some(B64.encode(snapshot_png));
        Self::image_of(self.call(&req)?, "render")
    }
}
