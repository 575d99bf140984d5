//! The session state machine.
//!
//! [`SessionState::apply`] interprets one keyboard-level [`Command`] against
//! the current [`Mode`], edits the scene and tile grid, and returns the
//! feedback events for the transition. Every call appends exactly one entry
//! to the event log, including calls that change nothing.
//!
//! Backend work never happens here. Entering [`Mode::AwaitBackend`] records a
//! pending request; a driver (see [`driver`]) performs it and feeds the result
//! back as [`Command::GenerationArrived`] or [`Command::DescriptionArrived`].

pub mod checks;
pub mod driver;
pub mod script;

use serde::{Deserialize, Serialize};

use crate::feedback::{
    generation_announcement, local_description, radar_scan, size_to_frequency, EarconKind, FeedbackEvent,
    SonificationParams,
};
use crate::scene::{
    CanvasConfig, Direction, MoveOutcome, ObjectId, Point, ResizeDirection, ResizeOutcome, Scene, SceneObject,
    Size2D, DEFAULT_OBJECT_SIZE, MOVE_STEP, RESIZE_STEP,
};
use crate::tiles::{relayout_from_scene, NavOutcome, TileCoord, TileError, TileGrid, PUSH_STEP};

pub use driver::{run_job, Editor, Job, JobKind};

pub const NOT_AVAILABLE: &str = "Command not available here";
pub const PLEASE_WAIT: &str = "Generating, please wait";
pub const CANCELLED: &str = "Cancelled";

/// Spoken entries of the keyboard command list, in reading order.
pub const HELP_ENTRIES: [&str; 12] = [
    "SHIFT + G. Global canvas description. Hear a description of the whole canvas.",
    "SHIFT + I. Local image description. Hear the details of the image on this tile.",
    "SHIFT + R. Radar scan. Hear the other objects and how far away they are.",
    "SHIFT + C. Image chat. Ask a question about the image on this tile.",
    "SHIFT + L. Location edit. Move the image with the arrow keys.",
    "SHIFT + S. Size edit. Make the image bigger or smaller with the up and down arrow keys.",
    "SHIFT + Arrow key. Push image. Push the image tile to make room for a new one.",
    "SHIFT + X. Delete image. Remove the image on this tile.",
    "Arrow keys. Move between tiles, or move and resize the image in an edit mode.",
    "ENTER. Image generation. Speak a request to generate an image, or regenerate the image on this tile.",
    "ESC. Quit or stop. Leave an edit mode or stop the current speech.",
    "SHIFT + K. Keyboard commands. Hear this list again.",
];

/// An image produced by the backend, ready to be placed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedImage {
    pub name: String,
    pub image_ref: String,
    pub description: String,
    pub prompt: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    Enter,
    ShiftG,
    ShiftI,
    ShiftR,
    ShiftC,
    ShiftL,
    ShiftS,
    ShiftK,
    ShiftX,
    ShiftArrow {
        direction: Direction,
    },
    Arrow {
        direction: Direction,
    },
    Shift,
    Escape,
    TranscriptArrived {
        text: String,
    },
    GenerationArrived {
        request: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        image: Option<GeneratedImage>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        error: Option<String>,
    },
    DescriptionArrived {
        request: u64,
        text: String,
    },
    UpdateSettings {
        config: CanvasConfig,
    },
}

impl Command {
    /// Commands that only a backend driver may submit.
    pub fn is_backend_result(&self) -> bool {
        matches!(self, Command::GenerationArrived { .. } | Command::DescriptionArrived { .. })
    }
}

/// What a pending transcript or backend request is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "purpose", rename_all = "snake_case")]
pub enum Purpose {
    /// A new object for an empty tile.
    Generate { tile: TileCoord },
    /// A replacement image for an existing object.
    Regenerate { object: ObjectId },
    /// A question about one object.
    Chat { object: ObjectId },
    GlobalDescribe,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    Navigate,
    AwaitTranscript {
        #[serde(flatten)]
        purpose: Purpose,
    },
    ConfirmTranscript {
        text: String,
        #[serde(flatten)]
        purpose: Purpose,
    },
    AwaitBackend {
        request: u64,
        #[serde(flatten)]
        purpose: Purpose,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        text: Option<String>,
    },
    LocationEdit {
        object: ObjectId,
    },
    SizeEdit {
        object: ObjectId,
    },
    HelpList {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        index: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub seq: u64,
    pub command: Command,
    pub events: Vec<FeedbackEvent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionState {
    pub scene: Scene,
    pub grid: TileGrid,
    pub mode: Mode,
    pub seed: u64,
    pub next_object_id: u32,
    pub event_log: Vec<LogEntry>,
    pub sonification: SonificationParams,
}

impl SessionState {
    pub fn new(config: CanvasConfig, seed: u64) -> Self {
        SessionState {
            scene: Scene::new(config),
            grid: TileGrid::init(),
            mode: Mode::Navigate,
            seed,
            next_object_id: 0,
            event_log: Vec::new(),
            sonification: SonificationParams::default(),
        }
    }

    pub fn config(&self) -> &CanvasConfig {
        &self.scene.config
    }

    /// Sequence number the next command will receive.
    pub fn next_seq(&self) -> u64 {
        self.event_log.len() as u64
    }

    /// The backend request the session is waiting on, if any.
    pub fn pending_request(&self) -> Option<u64> {
        match self.mode {
            Mode::AwaitBackend { request, .. } => Some(request),
            _ => None,
        }
    }

    /// Applies one command and logs it. Returns the events it produced.
    pub fn apply(&mut self, cmd: Command) -> Vec<FeedbackEvent> {
        let seq = self.next_seq();
        let events = {
            let mut t = Transition {
                state: self,
                seq,
                events: Vec::new(),
            };
            t.run(&cmd);
            t.events
        };
        self.event_log.push(LogEntry {
            seq,
            command: cmd,
            events: events.clone(),
        });
        events
    }

    /// Greeting spoken when the user arrives on an empty canvas.
    pub fn greeting(&self) -> String {
        format!(
            "You are currently focused on the first tile. Press Enter to generate the image on the {} by {} canvas.",
            self.scene.config.width, self.scene.config.height
        )
    }
}

/// Functional form of [`SessionState::apply`].
pub fn handle(mut state: SessionState, cmd: Command) -> (SessionState, Vec<FeedbackEvent>) {
    let events = state.apply(cmd);
    (state, events)
}

struct Transition<'a> {
    state: &'a mut SessionState,
    seq: u64,
    events: Vec<FeedbackEvent>,
}

impl Transition<'_> {
    fn say(&mut self, text: impl Into<String>) {
        let rate = self.state.scene.config.speech_rate;
        self.events.push(FeedbackEvent::speech(text, rate));
    }

    fn earcon(&mut self, kind: EarconKind, pan: f64) {
        self.events.push(FeedbackEvent::earcon(kind, pan));
    }

    fn thump(&mut self) {
        self.earcon(EarconKind::Thump, 0.0);
    }

    fn not_available(&mut self) {
        self.say(NOT_AVAILABLE);
    }

    fn escape_to_navigate(&mut self, message: &str) {
        self.events.push(FeedbackEvent::StopSpeech);
        self.state.mode = Mode::Navigate;
        self.say(message);
    }

    fn object_name(&self, id: ObjectId) -> String {
        self.state
            .scene
            .get(id)
            .map_or_else(|| id.to_string(), |o| o.name.clone())
    }

    fn run(&mut self, cmd: &Command) {
        match self.state.mode.clone() {
            Mode::Navigate => self.navigate_mode(cmd),
            Mode::AwaitTranscript { purpose } => self.await_transcript(cmd, purpose),
            Mode::ConfirmTranscript { text, purpose } => self.confirm_transcript(cmd, text, purpose),
            Mode::AwaitBackend { request, purpose, .. } => self.await_backend(cmd, request, purpose),
            Mode::LocationEdit { object } => self.location_edit(cmd, object),
            Mode::SizeEdit { object } => self.size_edit(cmd, object),
            Mode::HelpList { index } => self.help_list(cmd, index),
        }
    }

    fn navigate_mode(&mut self, cmd: &Command) {
        let under_cursor = self.state.grid.object_under_cursor();
        match (cmd, under_cursor) {
            (Command::Arrow { direction }, _) => self.navigate(*direction),
            (Command::Enter, None) => {
                let tile = self.state.grid.cursor();
                self.state.mode = Mode::AwaitTranscript {
                    purpose: Purpose::Generate { tile },
                };
                self.earcon(EarconKind::Beep, 0.0);
            }
            (Command::Enter, Some(object)) => {
                self.state.mode = Mode::AwaitTranscript {
                    purpose: Purpose::Regenerate { object },
                };
                self.earcon(EarconKind::Beep, 0.0);
            }
            (Command::ShiftG, _) => {
                self.state.mode = Mode::AwaitBackend {
                    request: self.seq,
                    purpose: Purpose::GlobalDescribe,
                    text: None,
                };
                self.say("Describing the canvas");
            }
            (Command::ShiftI, Some(object)) => {
                let text = local_description(self.state.scene.get(object).expect("tile objects exist"));
                self.say(text);
            }
            (Command::ShiftR, Some(object)) => match radar_scan(&self.state.scene, object) {
                Ok(text) => self.say(text),
                Err(e) => self.say(e.to_string()),
            },
            (Command::ShiftC, Some(object)) => {
                self.state.mode = Mode::AwaitTranscript {
                    purpose: Purpose::Chat { object },
                };
                self.say("Ask a question about the image and I will answer.");
                self.earcon(EarconKind::Beep, 0.0);
            }
            (Command::ShiftL, Some(object)) => {
                self.state.mode = Mode::LocationEdit { object };
                self.say("Location edit mode");
            }
            (Command::ShiftS, Some(object)) => {
                self.state.mode = Mode::SizeEdit { object };
                self.say("Size edit mode");
            }
            (Command::ShiftArrow { direction }, Some(_)) => self.push(*direction),
            (Command::ShiftX, Some(_)) => {
                let cursor = self.state.grid.cursor();
                match self.state.grid.delete_at(&mut self.state.scene, cursor) {
                    Ok(_) => self.say("Deleted image on the tile"),
                    Err(e) => self.say(e.to_string()),
                }
            }
            (Command::ShiftK, _) => {
                self.state.mode = Mode::HelpList { index: None };
                self.say("Keyboard commands. Press the down arrow key to hear each command, and Escape to close the list.");
            }
            (Command::Escape, _) => self.events.push(FeedbackEvent::StopSpeech),
            (Command::UpdateSettings { config }, _) => self.update_settings(*config),
            (Command::Shift | Command::TranscriptArrived { .. }, _) => {}
            (cmd, _) if cmd.is_backend_result() => {}
            _ => self.not_available(),
        }
    }

    fn navigate(&mut self, direction: Direction) {
        match self.state.grid.navigate(direction) {
            NavOutcome::MovedToEmpty(_) => {
                let pan = self.state.sonification.pan_for(direction);
                self.earcon(EarconKind::nav(direction), pan);
            }
            NavOutcome::MovedToObject(_, id) => {
                let name = self.object_name(id);
                self.say(name);
            }
            NavOutcome::EdgeBump => self.thump(),
        }
    }

    fn push(&mut self, direction: Direction) {
        let cursor = self.state.grid.cursor();
        match self.state.grid.push(&mut self.state.scene, cursor, direction) {
            Ok(_) => {
                let side = match direction {
                    Direction::Up => "top",
                    Direction::Down => "bottom",
                    Direction::Left => "left",
                    Direction::Right => "right",
                };
                self.say(format!("Pushed image to the {side}"));
            }
            Err(TileError::PushBlockedAtCanvasEdge) => {
                self.thump();
                self.say("The image cannot be pushed past the edge of the canvas");
            }
            Err(e) => self.say(e.to_string()),
        }
    }

    fn update_settings(&mut self, config: CanvasConfig) {
        match self.state.scene.set_config(config) {
            Ok(()) => {
                let c = self.state.scene.config;
                self.say(format!(
                    "Settings updated. The canvas is {} by {}, image style {}, speech rate {}.",
                    c.width,
                    c.height,
                    c.image_style.as_str(),
                    c.speech_rate
                ));
            }
            Err(e) => self.say(e.to_string()),
        }
    }

    fn await_transcript(&mut self, cmd: &Command, purpose: Purpose) {
        match cmd {
            Command::TranscriptArrived { text } => self.detected(text, purpose),
            Command::Escape => self.escape_to_navigate(CANCELLED),
            Command::Shift => {}
            cmd if cmd.is_backend_result() => {}
            _ => self.not_available(),
        }
    }

    fn detected(&mut self, text: &str, purpose: Purpose) {
        let text = text.trim();
        if text.is_empty() {
            self.say("I did not catch that. Please try again.");
            self.earcon(EarconKind::Beep, 0.0);
            self.state.mode = Mode::AwaitTranscript { purpose };
            return;
        }
        self.say(format!(
            "Detected: {text}. Press Enter to confirm or the Escape key to cancel."
        ));
        self.state.mode = Mode::ConfirmTranscript {
            text: text.to_string(),
            purpose,
        };
    }

    fn confirm_transcript(&mut self, cmd: &Command, text: String, purpose: Purpose) {
        match cmd {
            Command::Enter => {
                self.say(match purpose {
                    Purpose::Chat { .. } => "Getting the answer",
                    _ => "Generating the image",
                });
                self.state.mode = Mode::AwaitBackend {
                    request: self.seq,
                    purpose,
                    text: Some(text),
                };
            }
            Command::TranscriptArrived { text } => self.detected(text, purpose),
            Command::Escape => self.escape_to_navigate(CANCELLED),
            Command::Shift => {}
            cmd if cmd.is_backend_result() => {}
            _ => self.not_available(),
        }
    }

    fn await_backend(&mut self, cmd: &Command, request: u64, purpose: Purpose) {
        match cmd {
            Command::Escape => self.escape_to_navigate(CANCELLED),
            Command::GenerationArrived {
                request: r,
                image,
                error,
            } if *r == request => {
                self.state.mode = Mode::Navigate;
                match (image, error) {
                    (Some(image), None) => self.place_generated(image, purpose),
                    (_, Some(error)) => self.say(format!("Image generation failed: {error}. Press Enter to try again.")),
                    (None, None) => self.say("Image generation failed: the backend returned nothing. Press Enter to try again."),
                }
            }
            Command::DescriptionArrived { request: r, text } if *r == request => {
                self.state.mode = Mode::Navigate;
                self.say(text.clone());
            }
            Command::Shift | Command::TranscriptArrived { .. } => {}
            cmd if cmd.is_backend_result() => {}
            _ => self.say(PLEASE_WAIT),
        }
    }

    /// Center for a new object on `tile`: the nearest occupied tile's object
    /// center plus the tile offset in push steps.
    fn placement_center(&self, tile: TileCoord) -> Option<Point> {
        let (coord, id) = self
            .state
            .grid
            .occupied()
            .min_by_key(|(c, _)| (c.chebyshev(tile), c.row, c.col))?;
        let anchor = self.state.scene.get(id)?.center;
        Some(Point::new(
            anchor.x + (tile.col - coord.col) * PUSH_STEP,
            anchor.y + (tile.row - coord.row) * PUSH_STEP,
        ))
    }

    fn place_generated(&mut self, image: &GeneratedImage, purpose: Purpose) {
        match purpose {
            Purpose::Generate { tile } => {
                if self.state.grid.object_at(tile).is_some() || self.state.grid.tile(tile).is_none() {
                    self.say("Image generation failed: the tile is no longer free.");
                    return;
                }
                let id = ObjectId(self.state.next_object_id);
                let mut obj = SceneObject::new(id, image.name.clone(), Size2D::square(DEFAULT_OBJECT_SIZE));
                obj.description = image.description.clone();
                obj.prompt_text = image.prompt.clone();
                obj.image_ref = Some(image.image_ref.clone());
                let placed = match self.placement_center(tile) {
                    None => self.state.scene.place_first(obj),
                    Some(center) => self.state.scene.place_at(obj, center),
                };
                if let Err(e) = placed {
                    self.say(format!("Image generation failed: {e}"));
                    return;
                }
                if let Err(e) = self.state.grid.occupy(tile, id) {
                    self.state.scene.remove(id).expect("just placed");
                    self.say(format!("Image generation failed: {e}"));
                    return;
                }
                self.state.next_object_id += 1;
                let text = generation_announcement(self.state.scene.get(id).expect("just placed"));
                self.say(text);
            }
            Purpose::Regenerate { object } => {
                let Some(obj) = self.state.scene.get_mut(object) else {
                    self.say("Image generation failed: the image was removed.");
                    return;
                };
                obj.name = image.name.clone();
                obj.description = image.description.clone();
                obj.prompt_text = image.prompt.clone();
                obj.image_ref = Some(image.image_ref.clone());
                let text = generation_announcement(obj);
                self.say(text);
            }
            Purpose::Chat { .. } | Purpose::GlobalDescribe => {
                self.say("Image generation failed: unexpected result.");
            }
        }
    }

    fn location_edit(&mut self, cmd: &Command, object: ObjectId) {
        match cmd {
            Command::Arrow { direction } => match self.state.scene.move_object(object, *direction, MOVE_STEP) {
                Ok(MoveOutcome::Moved(_)) => {
                    let pan = self.state.sonification.pan_for(*direction);
                    self.earcon(EarconKind::nav(*direction), pan);
                }
                Ok(MoveOutcome::MovedWithOverlap(_, others)) => {
                    let pan = self.state.sonification.pan_for(*direction);
                    self.earcon(EarconKind::nav(*direction), pan);
                    let names: Vec<String> = others.iter().map(|id| self.object_name(*id)).collect();
                    self.say(format!("Overlapping with {}", names.join(" and ")));
                }
                Ok(MoveOutcome::BlockedAtEdge) => self.thump(),
                Err(e) => self.say(e.to_string()),
            },
            Command::Shift => {
                if let Some(obj) = self.state.scene.get(object) {
                    let c = obj.center;
                    self.say(format!("Current location is {} by {}", c.x, c.y));
                }
            }
            Command::Escape => {
                self.escape_to_navigate("Location edit mode off");
                self.state.grid = relayout_from_scene(&self.state.scene);
                self.state.grid.focus_object(object);
            }
            Command::TranscriptArrived { .. } => {}
            cmd if cmd.is_backend_result() => {}
            _ => self.not_available(),
        }
    }

    fn size_edit(&mut self, cmd: &Command, object: ObjectId) {
        let resize = |direction: &Direction| match direction {
            Direction::Up => Some(ResizeDirection::Increase),
            Direction::Down => Some(ResizeDirection::Decrease),
            Direction::Left | Direction::Right => None,
        };
        match cmd {
            Command::Arrow { direction } => match resize(direction) {
                Some(change) => match self.state.scene.resize_object(object, change, RESIZE_STEP) {
                    Ok(ResizeOutcome::Resized(size)) => {
                        let f = size_to_frequency(&size, &self.state.sonification);
                        self.events.push(FeedbackEvent::size_tick(f));
                    }
                    Ok(ResizeOutcome::AtMinimum) => {
                        self.thump();
                        self.say("The image is at its smallest size");
                    }
                    Ok(ResizeOutcome::BlockedAtEdge) => self.thump(),
                    Err(e) => self.say(e.to_string()),
                },
                None => self.not_available(),
            },
            Command::Shift => {
                if let Some(obj) = self.state.scene.get(object) {
                    let s = obj.size;
                    self.say(format!("size {} by {}", s.width, s.height));
                }
            }
            Command::Escape => self.escape_to_navigate("Size edit mode off"),
            Command::TranscriptArrived { .. } => {}
            cmd if cmd.is_backend_result() => {}
            _ => self.not_available(),
        }
    }

    fn help_list(&mut self, cmd: &Command, index: Option<usize>) {
        match cmd {
            Command::Arrow {
                direction: Direction::Down,
            } => {
                let next = index.map_or(0, |i| i + 1);
                if next >= HELP_ENTRIES.len() {
                    self.thump();
                } else {
                    self.state.mode = Mode::HelpList { index: Some(next) };
                    self.say(HELP_ENTRIES[next]);
                }
            }
            Command::Arrow { direction: Direction::Up } => match index {
                Some(i) if i > 0 => {
                    self.state.mode = Mode::HelpList { index: Some(i - 1) };
                    self.say(HELP_ENTRIES[i - 1]);
                }
                _ => self.thump(),
            },
            Command::Escape => {
                let message = if self.state.scene.is_empty() {
                    self.state.greeting()
                } else {
                    "Keyboard commands closed".to_string()
                };
                self.escape_to_navigate(&message);
            }
            Command::Shift | Command::TranscriptArrived { .. } => {}
            cmd if cmd.is_backend_result() => {}
            _ => self.not_available(),
        }
    }
}
