//! Accessible, tile-based image authoring.
//!
//! The scene model ([`scene`]) holds positioned objects on a bounded canvas;
//! [`tiles`] maps them onto a navigable grid; [`engine`] is the keyboard
//! state machine that edits both and emits [`feedback`] events. Image
//! generation goes through [`genai`], output through [`render`].

pub mod engine;
pub mod feedback;
pub mod genai;
pub mod persist;
pub mod render;
pub mod scene;
pub mod store;
pub mod tiles;

pub use feedback::{FeedbackEvent, StreamRecord};
pub use scene::{CanvasConfig, Direction, ImageStyle, ObjectId, Point, Scene, SceneObject, Size2D};
pub use tiles::{TileCoord, TileGrid};
