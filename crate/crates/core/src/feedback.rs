//! Speech and earcon feedback.
//!
//! Every editor transition produces an ordered list of [`FeedbackEvent`]s. The
//! functions here build the parameters of those events (pan, tone frequency)
//! and the descriptions that do not need a generative backend.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genai::templates;
use crate::scene::{Direction, ObjectId, Scene, SceneObject, Size2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EarconKind {
    NavUp,
    NavDown,
    NavLeft,
    NavRight,
    Thump,
    Beep,
    SizeTick,
}

impl EarconKind {
    pub fn nav(direction: Direction) -> EarconKind {
        match direction {
            Direction::Up => EarconKind::NavUp,
            Direction::Down => EarconKind::NavDown,
            Direction::Left => EarconKind::NavLeft,
            Direction::Right => EarconKind::NavRight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FeedbackEvent {
    Speech {
        text: String,
        rate: u8,
    },
    Earcon {
        kind: EarconKind,
        pan: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        frequency_hz: Option<f64>,
    },
    StopSpeech,
}

impl FeedbackEvent {
    pub fn speech(text: impl Into<String>, rate: u8) -> Self {
        FeedbackEvent::Speech { text: text.into(), rate }
    }

    pub fn earcon(kind: EarconKind, pan: f64) -> Self {
        FeedbackEvent::Earcon {
            kind,
            pan,
            frequency_hz: None,
        }
    }

    pub fn size_tick(frequency_hz: f64) -> Self {
        FeedbackEvent::Earcon {
            kind: EarconKind::SizeTick,
            pan: 0.0,
            frequency_hz: Some(round_tenth(frequency_hz)),
        }
    }

    pub fn text(&self) -> Option<&str> {
        match self {
            FeedbackEvent::Speech { text, .. } => Some(text),
            _ => None,
        }
    }

    pub fn earcon_kind(&self) -> Option<EarconKind> {
        match self {
            FeedbackEvent::Earcon { kind, .. } => Some(*kind),
            _ => None,
        }
    }
}

/// One line of the feedback event stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamRecord {
    /// Position of the event across the whole session, starting at 0.
    pub seq: u64,
    /// Sequence number of the command that produced the event.
    pub command_seq: u64,
    #[serde(flatten)]
    pub event: FeedbackEvent,
}

impl StreamRecord {
    pub fn to_line(&self) -> String {
        let mut line = serde_json::to_string(self).expect("stream records always serialize");
        line.push('\n');
        line
    }
}

/// Tone mapping for size edits and stereo spread for directional earcons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SonificationParams {
    pub base_frequency_hz: f64,
    pub octave_span_px: f64,
    pub pan_gain: f64,
}

impl Default for SonificationParams {
    fn default() -> Self {
        SonificationParams {
            base_frequency_hz: 440.0,
            octave_span_px: 200.0,
            pan_gain: 1.0,
        }
    }
}

impl SonificationParams {
    pub fn pan_for(&self, direction: Direction) -> f64 {
        match direction {
            Direction::Left => -self.pan_gain,
            Direction::Right => self.pan_gain,
            Direction::Up | Direction::Down => 0.0,
        }
    }
}

/// Tone for an object size: one octave per `octave_span_px` of the larger
/// dimension, anchored so a 100 px object sounds at the base frequency.
pub fn size_to_frequency(size: &Size2D, params: &SonificationParams) -> f64 {
    let exponent = (size.max_dimension() - 100) as f64 / params.octave_span_px;
    params.base_frequency_hz * exponent.exp2()
}

pub fn pan_for_direction(direction: Direction) -> f64 {
    SonificationParams::default().pan_for(direction)
}

pub fn round_tenth(value: f64) -> f64 {
    (value * 10.0).round() / 10.0
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeedbackError {
    #[error("No other objects on the canvas")]
    NoOtherObjects,
    #[error("unknown object {0}")]
    UnknownObject(ObjectId),
}

/// Distances from one object to every other object, nearest first.
///
/// Each entry gives the per-axis offset between centers, vertical first:
/// `"frisbee, 50 pixels up and 30 pixels left"`.
pub fn radar_scan(scene: &Scene, id: ObjectId) -> Result<String, FeedbackError> {
    let me = scene.get(id).ok_or(FeedbackError::UnknownObject(id))?;
    let mut others: Vec<(i64, i64, &SceneObject)> = scene
        .objects()
        .iter()
        .filter(|o| o.id != id)
        .map(|o| (o.center.x - me.center.x, o.center.y - me.center.y, o))
        .collect();
    if others.is_empty() {
        return Err(FeedbackError::NoOtherObjects);
    }
    others.sort_by_key(|(dx, dy, o)| (dx * dx + dy * dy, o.id));
    let entries: Vec<String> = others
        .iter()
        .map(|(dx, dy, o)| format!("{}, {}", o.name, axis_phrase(*dx, *dy)))
        .collect();
    Ok(entries.join("; "))
}

fn axis_phrase(dx: i64, dy: i64) -> String {
    let mut parts = Vec::with_capacity(2);
    if dy != 0 {
        parts.push(format!("{} pixels {}", dy.abs(), if dy < 0 { "up" } else { "down" }));
    }
    if dx != 0 {
        parts.push(format!("{} pixels {}", dx.abs(), if dx < 0 { "left" } else { "right" }));
    }
    if parts.is_empty() {
        return "at the same position".to_string();
    }
    parts.join(" and ")
}

/// Fills the local description template for one object. Coordinates are the
/// object's top-left corner.
pub fn local_description(obj: &SceneObject) -> String {
    let tl = obj.top_left();
    let description = obj.description.trim();
    let description = description.strip_suffix('.').unwrap_or(description);
    let template = templates::LOCAL_DESCRIPTION
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join(" ");
    templates::fill(
        &template,
        &[
            ("image.name", obj.name.as_str()),
            ("image.coordinate.x", &tl.x.to_string()),
            ("image.coordinate.y", &tl.y.to_string()),
            ("image.sizeParts.width", &obj.size.width.to_string()),
            ("image.sizeParts.height", &obj.size.height.to_string()),
            ("image.descriptions", description),
        ],
    )
}

/// Which third of the canvas a coordinate falls in, 0..=2.
pub fn third(v: i64, extent: i64) -> usize {
    if 3 * v < extent {
        0
    } else if 3 * v < 2 * extent {
        1
    } else {
        2
    }
}

/// Qualitative region name of a center, e.g. `"top-left"`.
pub fn region_name(x: i64, y: i64, width: i64, height: i64) -> &'static str {
    const NAMES: [[&str; 3]; 3] = [
        ["top-left", "top-center", "top-right"],
        ["middle-left", "middle-center", "middle-right"],
        ["bottom-left", "bottom-center", "bottom-right"],
    ];
    NAMES[third(y, height)][third(x, width)]
}

/// Rule-based canvas summary used when no generative backend is available.
pub fn fallback_global_description(scene: &Scene) -> String {
    let objects = scene.objects();
    if objects.is_empty() {
        return "The canvas is empty.".to_string();
    }
    let (w, h) = (scene.config.width, scene.config.height);
    let placed: Vec<String> = objects
        .iter()
        .map(|o| format!("{} in the {}", o.name, region_name(o.center.x, o.center.y, w, h)))
        .collect();
    let mut text = format!("The canvas has {}", placed.join(", "));
    let pairs: Vec<String> = objects
        .iter()
        .enumerate()
        .flat_map(|(i, a)| {
            objects[i + 1..]
                .iter()
                .filter(move |b| a.overlaps(b))
                .map(move |b| format!("{} and {}", a.name, b.name))
        })
        .collect();
    if !pairs.is_empty() {
        text.push_str("; overlapping: ");
        text.push_str(&pairs.join(", "));
    }
    text.push('.');
    text
}

/// Announcement spoken once an object has been generated and placed.
pub fn generation_announcement(obj: &SceneObject) -> String {
    let tl = obj.top_left();
    let mut text = format!(
        "{} has been generated. The coordinates of the image are {} by {}.",
        capitalize(&obj.name),
        tl.x,
        tl.y
    );
    let description = obj.description.trim();
    if !description.is_empty() {
        text.push(' ');
        text.push_str(description);
        if !description.ends_with(['.', '!', '?']) {
            text.push('.');
        }
    }
    text.push_str(&format!(" The image measures {} by {}.", obj.size.width, obj.size.height));
    text
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{CanvasConfig, Point};

    fn placed(scene: &mut Scene, id: u32, name: &str, center: (i64, i64)) {
        let obj = SceneObject::new(ObjectId(id), name, Size2D::square(100));
        scene.place_at(obj, Point::new(center.0, center.1)).unwrap();
    }

    #[test]
    fn frequency_mapping() {
        let p = SonificationParams::default();
        assert_eq!(size_to_frequency(&Size2D::square(100), &p), 440.0);
        assert_eq!(size_to_frequency(&Size2D::square(300), &p), 880.0);
        assert_eq!(round_tenth(size_to_frequency(&Size2D::square(110), &p)), 455.5);
        assert_eq!(size_to_frequency(&Size2D::new(110, 55), &p), size_to_frequency(&Size2D::square(110), &p));
    }

    #[test]
    fn pans() {
        assert_eq!(pan_for_direction(Direction::Left), -1.0);
        assert_eq!(pan_for_direction(Direction::Up), 0.0);
        assert_eq!(pan_for_direction(Direction::Down), 0.0);
        assert_eq!(pan_for_direction(Direction::Right), 1.0);
    }

    #[test]
    fn radar_phrasing() {
        let mut scene = Scene::new(CanvasConfig::default());
        placed(&mut scene, 0, "dog", (300, 300));
        assert_eq!(radar_scan(&scene, ObjectId(0)), Err(FeedbackError::NoOtherObjects));
        placed(&mut scene, 1, "tree", (320, 300));
        assert_eq!(radar_scan(&scene, ObjectId(0)).unwrap(), "tree, 20 pixels right");
        placed(&mut scene, 2, "frisbee", (270, 250));
        assert_eq!(
            radar_scan(&scene, ObjectId(0)).unwrap(),
            "tree, 20 pixels right; frisbee, 50 pixels up and 30 pixels left"
        );
        assert_eq!(
            FeedbackError::NoOtherObjects.to_string(),
            "No other objects on the canvas"
        );
    }

    #[test]
    fn local_description_uses_top_left() {
        let mut dog = SceneObject::new(ObjectId(0), "golden dog", Size2D::square(100));
        dog.center = Point::new(300, 300);
        dog.description = "A simple line drawing of a dog.".into();
        assert_eq!(
            local_description(&dog),
            "The image is called golden dog. It is located at x-coordinate 250 and y-coordinate 250. \
             The size of the image is 100 in width and 100 in height. \
             Additional description: A simple line drawing of a dog."
        );

        let mut speck = SceneObject::new(ObjectId(1), "speck", Size2D::square(1));
        speck.center = Point::new(0, 0);
        assert!(local_description(&speck).contains("x-coordinate 0 and y-coordinate 0"));
    }

    #[test]
    fn global_fallback() {
        let mut scene = Scene::new(CanvasConfig::default());
        assert_eq!(fallback_global_description(&scene), "The canvas is empty.");
        placed(&mut scene, 0, "dog", (300, 300));
        assert_eq!(fallback_global_description(&scene), "The canvas has dog in the middle-center.");
        placed(&mut scene, 1, "table", (300, 500));
        placed(&mut scene, 2, "potted plant", (300, 430));
        assert_eq!(
            fallback_global_description(&scene),
            "The canvas has dog in the middle-center, table in the bottom-center, \
             potted plant in the bottom-center; overlapping: table and potted plant."
        );
    }

    #[test]
    fn announcement() {
        let mut scene = Scene::new(CanvasConfig::default());
        let mut dog = SceneObject::new(ObjectId(0), "dog", Size2D::square(100));
        dog.description = "A simple line drawing of a dog.".into();
        scene.place_first(dog).unwrap();
        assert_eq!(
            generation_announcement(&scene.objects()[0]),
            "Dog has been generated. The coordinates of the image are 250 by 250. \
             A simple line drawing of a dog. The image measures 100 by 100."
        );
    }

    #[test]
    fn event_serialization() {
        let rec = StreamRecord {
            seq: 3,
            command_seq: 1,
            event: FeedbackEvent::size_tick(455.4931),
        };
        assert_eq!(
            rec.to_line(),
            "{\"seq\":3,\"command_seq\":1,\"type\":\"earcon\",\"kind\":\"size_tick\",\"pan\":0.0,\"frequency_hz\":455.5}\n"
        );
        let back: StreamRecord = serde_json::from_str(rec.to_line().trim()).unwrap();
        assert_eq!(back, rec);
        let stop = serde_json::to_string(&FeedbackEvent::StopSpeech).unwrap();
        assert_eq!(stop, "{\"type\":\"stop_speech\"}");
    }
}
