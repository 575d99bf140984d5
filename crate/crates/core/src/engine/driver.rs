//! Runs the backend requests a session is waiting on.
//!
//! [`Job::pending`] extracts the owned inputs of a request so it can run
//! anywhere (a worker thread in the service, inline in the CLI); [`run_job`]
//! turns it into the result command. [`Editor`] does both synchronously,
//! which makes replay a plain fold over the script.

use std::sync::Arc;

use super::{Command, GeneratedImage, Mode, Purpose, SessionState};
use crate::feedback::FeedbackEvent;
use crate::genai::{self, GenBackend, GenError};
use crate::render::compose;
use crate::scene::{CanvasConfig, ImageStyle, Scene, SceneObject};
use crate::store::ImageStore;

#[derive(Debug, Clone, PartialEq)]
pub enum JobKind {
    Generate { transcript: String, style: ImageStyle },
    DescribeCanvas { scene: Scene },
    Chat { object: SceneObject, question: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub request: u64,
    pub kind: JobKind,
}

impl Job {
    /// The request the session is waiting on, with everything needed to
    /// fulfil it.
    pub fn pending(state: &SessionState) -> Option<Job> {
        let Mode::AwaitBackend { request, purpose, text } = &state.mode else {
            return None;
        };
        let text = text.clone().unwrap_or_default();
        let kind = match purpose {
            Purpose::Generate { .. } | Purpose::Regenerate { .. } => JobKind::Generate {
                transcript: text,
                style: state.scene.config.image_style,
            },
            Purpose::GlobalDescribe => JobKind::DescribeCanvas {
                scene: state.scene.clone(),
            },
            Purpose::Chat { object } => JobKind::Chat {
                object: state.scene.get(*object)?.clone(),
                question: text,
            },
        };
        Some(Job {
            request: *request,
            kind,
        })
    }
}

/// Performs a job and returns the command that delivers its result. Backend
/// failures are reported inside the command, never as an error, so the
/// session always leaves its waiting state.
pub fn run_job(job: &Job, backend: &dyn GenBackend, store: &dyn ImageStore) -> Command {
    match &job.kind {
        JobKind::Generate { transcript, style } => {
            let result = genai::generate_object(backend, transcript, *style).and_then(|g| {
                let image_ref = store
                    .put(&g.png)
                    .map_err(|e| GenError::BackendUnavailable(format!("image store: {e}")))?;
                Ok(GeneratedImage {
                    name: g.name,
                    image_ref,
                    description: g.description,
                    prompt: g.prompt.final_prompt,
                })
            });
            match result {
                Ok(image) => Command::GenerationArrived {
                    request: job.request,
                    image: Some(image),
                    error: None,
                },
                Err(e) => Command::GenerationArrived {
                    request: job.request,
                    image: None,
                    error: Some(e.to_string()),
                },
            }
        }
        JobKind::DescribeCanvas { scene } => {
            let snapshot = compose(scene, store).image.to_png().unwrap_or_default();
            Command::DescriptionArrived {
                request: job.request,
                text: genai::describe_canvas(backend, scene, &snapshot),
            }
        }
        JobKind::Chat { object, question } => {
            let image = object
                .image_ref
                .as_deref()
                .and_then(|key| store.get(key).ok().flatten());
            let text = match genai::answer_question(backend, object, image.as_deref(), question) {
                Ok(answer) => answer,
                Err(e) => format!("Sorry, I could not answer that question: {e}"),
            };
            Command::DescriptionArrived {
                request: job.request,
                text,
            }
        }
    }
}

/// A session bound to a backend and an image store. Every submitted command
/// that starts a backend request is followed immediately by its result.
pub struct Editor {
    pub state: SessionState,
    backend: Arc<dyn GenBackend>,
    store: Arc<dyn ImageStore>,
}

impl Editor {
    pub fn new(state: SessionState, backend: Arc<dyn GenBackend>, store: Arc<dyn ImageStore>) -> Self {
        Editor { state, backend, store }
    }

    pub fn fresh(config: CanvasConfig, seed: u64, backend: Arc<dyn GenBackend>, store: Arc<dyn ImageStore>) -> Self {
        Editor::new(SessionState::new(config, seed), backend, store)
    }

    pub fn store(&self) -> &Arc<dyn ImageStore> {
        &self.store
    }

    pub fn backend(&self) -> &Arc<dyn GenBackend> {
        &self.backend
    }

    /// Applies `cmd` and, if it started a backend request, the result of
    /// that request. Returns (sequence number, events) per logged command.
    pub fn submit(&mut self, cmd: Command) -> Vec<(u64, Vec<FeedbackEvent>)> {
        let before = self.state.pending_request();
        let seq = self.state.next_seq();
        let mut out = vec![(seq, self.state.apply(cmd))];
        if let Some(job) = Job::pending(&self.state) {
            if Some(job.request) != before {
                let result = run_job(&job, self.backend.as_ref(), self.store.as_ref());
                let seq = self.state.next_seq();
                out.push((seq, self.state.apply(result)));
            }
        }
        out
    }

    pub fn into_state(self) -> SessionState {
        self.state
    }
}

/// Folds `commands` over a fresh session with the given backend.
pub fn replay(
    config: CanvasConfig,
    seed: u64,
    commands: impl IntoIterator<Item = Command>,
    backend: Arc<dyn GenBackend>,
    store: Arc<dyn ImageStore>,
) -> SessionState {
    let mut editor = Editor::fresh(config, seed, backend, store);
    for cmd in commands {
        editor.submit(cmd);
    }
    editor.into_state()
}
