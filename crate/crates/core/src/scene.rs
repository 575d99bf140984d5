//! Geometric scene model: objects on a bounded canvas.
//!
//! All geometry is integer pixels with the origin at the top-left corner,
//! x growing right and y growing down. An object is stored by its center;
//! the top-left corner is derived as `center - size / 2` (integer halves,
//! rounded toward negative infinity), and the box is half-open.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest width or height an object may be resized to.
pub const MIN_OBJECT_DIMENSION: i64 = 10;
/// Smallest canvas width or height accepted by [`CanvasConfig::validate`].
pub const MIN_CANVAS_DIMENSION: i64 = 100;
/// Size of a freshly generated object.
pub const DEFAULT_OBJECT_SIZE: i64 = 100;
/// Distance an object moves per arrow press in location edit mode.
pub const MOVE_STEP: i64 = 20;
/// Width change per arrow press in size edit mode.
pub const RESIZE_STEP: i64 = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SceneError {
    #[error("scene already contains objects")]
    NonEmptyScene,
    #[error("unknown object {0}")]
    UnknownObject(ObjectId),
    #[error("object {0} is already in the scene")]
    DuplicateObject(ObjectId),
    #[error("invalid canvas configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageStyle {
    Tactile,
    Color,
}

impl ImageStyle {
    pub fn as_str(self) -> &'static str {
        match self {
            ImageStyle::Tactile => "tactile",
            ImageStyle::Color => "color",
        }
    }
}

impl std::str::FromStr for ImageStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tactile" => Ok(ImageStyle::Tactile),
            "color" | "colour" => Ok(ImageStyle::Color),
            other => Err(format!("unknown image style `{other}` (expected tactile or color)")),
        }
    }
}

/// Canvas settings chosen in the settings dialog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanvasConfig {
    pub width: i64,
    pub height: i64,
    pub image_style: ImageStyle,
    pub speech_rate: u8,
}

impl Default for CanvasConfig {
    fn default() -> Self {
        CanvasConfig {
            width: 600,
            height: 600,
            image_style: ImageStyle::Tactile,
            speech_rate: 2,
        }
    }
}

impl CanvasConfig {
    pub fn validate(&self) -> Result<(), SceneError> {
        if self.width < MIN_CANVAS_DIMENSION || self.height < MIN_CANVAS_DIMENSION {
            return Err(SceneError::InvalidConfig(format!(
                "canvas must be at least {MIN_CANVAS_DIMENSION} by {MIN_CANVAS_DIMENSION} pixels, got {} by {}",
                self.width, self.height
            )));
        }
        if !(1..=3).contains(&self.speech_rate) {
            return Err(SceneError::InvalidConfig(format!(
                "speech rate must be 1, 2 or 3, got {}",
                self.speech_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const fn new(x: i64, y: i64) -> Self {
        Point { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Up, Direction::Down, Direction::Left, Direction::Right];

    /// Unit step as (dx, dy) in canvas orientation.
    pub fn delta(self) -> (i64, i64) {
        match self {
            Direction::Up => (0, -1),
            Direction::Down => (0, 1),
            Direction::Left => (-1, 0),
            Direction::Right => (1, 0),
        }
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::Left => "left",
            Direction::Right => "right",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "up" => Ok(Direction::Up),
            "down" => Ok(Direction::Down),
            "left" => Ok(Direction::Left),
            "right" => Ok(Direction::Right),
            other => Err(format!("unknown direction `{other}`")),
        }
    }
}

/// Object dimensions plus the aspect ratio captured when the object was created.
///
/// The aspect is kept as a reduced fraction so that height can be recomputed
/// from width without accumulating rounding error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Size2D {
    pub width: i64,
    pub height: i64,
    pub aspect_w: i64,
    pub aspect_h: i64,
}

impl Size2D {
    /// Size with its aspect taken from the given dimensions.
    pub fn new(width: i64, height: i64) -> Self {
        assert!(width > 0 && height > 0, "size must be positive");
        let g = gcd(width, height);
        Size2D {
            width,
            height,
            aspect_w: width / g,
            aspect_h: height / g,
        }
    }

    pub fn square(side: i64) -> Self {
        Size2D::new(side, side)
    }

    /// Height for `width` under the stored aspect, rounded half up.
    pub fn height_for_width(&self, width: i64) -> i64 {
        (2 * width * self.aspect_h + self.aspect_w).div_euclid(2 * self.aspect_w)
    }

    pub fn with_width(&self, width: i64) -> Size2D {
        Size2D {
            width,
            height: self.height_for_width(width),
            ..*self
        }
    }

    pub fn max_dimension(&self) -> i64 {
        self.width.max(self.height)
    }
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub u32);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Half-open axis-aligned box: `top_left` inclusive, `bottom_right` exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub top_left: Point,
    pub bottom_right: Point,
}

impl BoundingBox {
    pub fn intersects(&self, other: &BoundingBox) -> bool {
        self.top_left.x < other.bottom_right.x
            && other.top_left.x < self.bottom_right.x
            && self.top_left.y < other.bottom_right.y
            && other.top_left.y < self.bottom_right.y
    }

    pub fn contains_pixel(&self, x: i64, y: i64) -> bool {
        x >= self.top_left.x && x < self.bottom_right.x && y >= self.top_left.y && y < self.bottom_right.y
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: ObjectId,
    pub name: String,
    pub center: Point,
    pub size: Size2D,
    pub prompt_text: String,
    pub description: String,
    pub z: i64,
    pub image_ref: Option<String>,
}

impl SceneObject {
    pub fn new(id: ObjectId, name: impl Into<String>, size: Size2D) -> Self {
        SceneObject {
            id,
            name: name.into(),
            center: Point::new(0, 0),
            size,
            prompt_text: String::new(),
            description: String::new(),
            z: 0,
            image_ref: None,
        }
    }

    pub fn bounding_box(&self) -> BoundingBox {
        bounding_box_at(self.center, &self.size)
    }

    pub fn top_left(&self) -> Point {
        self.bounding_box().top_left
    }

    pub fn overlaps(&self, other: &SceneObject) -> bool {
        self.bounding_box().intersects(&other.bounding_box())
    }

    pub fn within_bounds(&self, config: &CanvasConfig) -> bool {
        box_within(&self.bounding_box(), config)
    }
}

fn bounding_box_at(center: Point, size: &Size2D) -> BoundingBox {
    let top_left = Point::new(center.x - size.width.div_euclid(2), center.y - size.height.div_euclid(2));
    BoundingBox {
        top_left,
        bottom_right: Point::new(top_left.x + size.width, top_left.y + size.height),
    }
}

fn box_within(bbox: &BoundingBox, config: &CanvasConfig) -> bool {
    bbox.top_left.x >= 0
        && bbox.top_left.y >= 0
        && bbox.bottom_right.x <= config.width
        && bbox.bottom_right.y <= config.height
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MoveOutcome {
    Moved(Point),
    MovedWithOverlap(Point, Vec<ObjectId>),
    BlockedAtEdge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResizeDirection {
    Increase,
    Decrease,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResizeOutcome {
    Resized(Size2D),
    AtMinimum,
    BlockedAtEdge,
}

/// Objects on a canvas, kept in ascending z order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scene {
    pub config: CanvasConfig,
    objects: Vec<SceneObject>,
}

impl Scene {
    pub fn new(config: CanvasConfig) -> Self {
        Scene {
            config,
            objects: Vec::new(),
        }
    }

    /// Rebuilds a scene from stored parts, checking id uniqueness and z order.
    pub fn from_parts(config: CanvasConfig, objects: Vec<SceneObject>) -> Result<Self, SceneError> {
        let mut scene = Scene::new(config);
        for obj in objects {
            if scene.get(obj.id).is_some() {
                return Err(SceneError::DuplicateObject(obj.id));
            }
            if scene.objects.last().is_some_and(|last| last.z >= obj.z) {
                return Err(SceneError::InvalidConfig(format!(
                    "object {} breaks ascending z order",
                    obj.id
                )));
            }
            scene.objects.push(obj);
        }
        Ok(scene)
    }

    pub fn objects(&self) -> &[SceneObject] {
        &self.objects
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn get(&self, id: ObjectId) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn get_mut(&mut self, id: ObjectId) -> Option<&mut SceneObject> {
        self.objects.iter_mut().find(|o| o.id == id)
    }

    fn require(&self, id: ObjectId) -> Result<&SceneObject, SceneError> {
        self.get(id).ok_or(SceneError::UnknownObject(id))
    }

    fn next_z(&self) -> i64 {
        self.objects.last().map_or(0, |o| o.z + 1)
    }

    /// Places the first object at the canvas center with z = 0.
    pub fn place_first(&mut self, mut obj: SceneObject) -> Result<(), SceneError> {
        if !self.objects.is_empty() {
            return Err(SceneError::NonEmptyScene);
        }
        obj.center = Point::new(self.config.width.div_euclid(2), self.config.height.div_euclid(2));
        obj.z = 0;
        self.objects.push(obj);
        Ok(())
    }

    /// Appends an object on top of the stack at the given center, shifted
    /// just enough to keep its box on the canvas.
    pub fn place_at(&mut self, mut obj: SceneObject, center: Point) -> Result<(), SceneError> {
        if self.get(obj.id).is_some() {
            return Err(SceneError::DuplicateObject(obj.id));
        }
        obj.center = self.clamp_center(center, &obj.size);
        obj.z = self.next_z();
        self.objects.push(obj);
        Ok(())
    }

    /// Nearest center to `center` whose box lies on the canvas. Objects larger
    /// than the canvas end up centered.
    pub fn clamp_center(&self, center: Point, size: &Size2D) -> Point {
        let clamp_axis = |c: i64, extent: i64, limit: i64| {
            let half = extent.div_euclid(2);
            let lo = half;
            let hi = limit - (extent - half);
            if lo > hi {
                limit.div_euclid(2)
            } else {
                c.clamp(lo, hi)
            }
        };
        Point::new(
            clamp_axis(center.x, size.width, self.config.width),
            clamp_axis(center.y, size.height, self.config.height),
        )
    }

    pub fn remove(&mut self, id: ObjectId) -> Result<SceneObject, SceneError> {
        let idx = self
            .objects
            .iter()
            .position(|o| o.id == id)
            .ok_or(SceneError::UnknownObject(id))?;
        Ok(self.objects.remove(idx))
    }

    /// Ids of objects whose boxes overlap `id`'s box, in z order.
    pub fn overlapping(&self, id: ObjectId) -> Result<Vec<ObjectId>, SceneError> {
        let obj = self.require(id)?;
        Ok(self
            .objects
            .iter()
            .filter(|o| o.id != id && o.overlaps(obj))
            .map(|o| o.id)
            .collect())
    }

    /// Translates an object by `step` pixels. Moves that would leave the
    /// canvas are rejected without changing the scene; overlaps are reported
    /// but never block.
    pub fn move_object(&mut self, id: ObjectId, direction: Direction, step: i64) -> Result<MoveOutcome, SceneError> {
        assert!(step > 0, "move step must be positive");
        let obj = self.require(id)?;
        let (dx, dy) = direction.delta();
        let center = Point::new(obj.center.x + dx * step, obj.center.y + dy * step);
        if !box_within(&bounding_box_at(center, &obj.size), &self.config) {
            return Ok(MoveOutcome::BlockedAtEdge);
        }
        self.get_mut(id).expect("checked above").center = center;
        let overlapped = self.overlapping(id)?;
        if overlapped.is_empty() {
            Ok(MoveOutcome::Moved(center))
        } else {
            Ok(MoveOutcome::MovedWithOverlap(center, overlapped))
        }
    }

    /// Grows or shrinks an object's width by `step`, recomputing height from
    /// the stored aspect. The center stays fixed.
    pub fn resize_object(
        &mut self,
        id: ObjectId,
        direction: ResizeDirection,
        step: i64,
    ) -> Result<ResizeOutcome, SceneError> {
        assert!(step > 0, "resize step must be positive");
        let obj = self.require(id)?;
        let width = match direction {
            ResizeDirection::Increase => obj.size.width + step,
            ResizeDirection::Decrease => obj.size.width - step,
        };
        if width < MIN_OBJECT_DIMENSION {
            return Ok(ResizeOutcome::AtMinimum);
        }
        let size = obj.size.with_width(width);
        if size.height < MIN_OBJECT_DIMENSION {
            return Ok(ResizeOutcome::AtMinimum);
        }
        if !box_within(&bounding_box_at(obj.center, &size), &self.config) {
            return Ok(ResizeOutcome::BlockedAtEdge);
        }
        self.get_mut(id).expect("checked above").size = size;
        Ok(ResizeOutcome::Resized(size))
    }

    /// Applies a translation to several objects at once, or to none of them
    /// if any would leave the canvas. Returns false when rejected.
    pub fn translate_all(&mut self, ids: &[ObjectId], dx: i64, dy: i64) -> Result<bool, SceneError> {
        for &id in ids {
            let obj = self.require(id)?;
            let center = Point::new(obj.center.x + dx, obj.center.y + dy);
            if !box_within(&bounding_box_at(center, &obj.size), &self.config) {
                return Ok(false);
            }
        }
        for &id in ids {
            let obj = self.get_mut(id).expect("checked above");
            obj.center = Point::new(obj.center.x + dx, obj.center.y + dy);
        }
        Ok(true)
    }

    /// Smallest canvas that still contains every object's box.
    pub fn required_extent(&self) -> (i64, i64) {
        self.objects.iter().fold((0, 0), |(w, h), o| {
            let b = o.bounding_box();
            (w.max(b.bottom_right.x), h.max(b.bottom_right.y))
        })
    }

    /// Replaces the canvas configuration. Shrinking the canvas below the
    /// extent of existing objects is rejected.
    pub fn set_config(&mut self, config: CanvasConfig) -> Result<(), SceneError> {
        config.validate()?;
        let (w, h) = self.required_extent();
        if config.width < w || config.height < h {
            return Err(SceneError::InvalidConfig(format!(
                "existing objects need a canvas of at least {w} by {h} pixels"
            )));
        }
        self.config = config;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obj(id: u32, center: (i64, i64), w: i64, h: i64) -> SceneObject {
        let mut o = SceneObject::new(ObjectId(id), format!("obj{id}"), Size2D::new(w, h));
        o.center = Point::new(center.0, center.1);
        o
    }

    fn canvas(w: i64, h: i64) -> CanvasConfig {
        CanvasConfig {
            width: w,
            height: h,
            ..CanvasConfig::default()
        }
    }

    #[test]
    fn first_object_goes_to_canvas_center() {
        let mut scene = Scene::new(canvas(600, 600));
        scene.place_first(obj(0, (0, 0), 100, 100)).unwrap();
        let o = &scene.objects()[0];
        assert_eq!(o.center, Point::new(300, 300));
        assert_eq!(o.top_left(), Point::new(250, 250));
        assert_eq!(o.z, 0);

        let mut small = Scene::new(canvas(100, 100));
        small.place_first(obj(0, (0, 0), 10, 10)).unwrap();
        assert_eq!(small.objects()[0].center, Point::new(50, 50));

        let mut odd = Scene::new(canvas(601, 601));
        odd.place_first(obj(0, (0, 0), 100, 100)).unwrap();
        assert_eq!(odd.objects()[0].center, Point::new(300, 300));
    }

    #[test]
    fn place_first_rejects_nonempty_scene() {
        let mut scene = Scene::new(canvas(600, 600));
        scene.place_first(obj(0, (0, 0), 100, 100)).unwrap();
        assert_eq!(scene.place_first(obj(1, (0, 0), 100, 100)), Err(SceneError::NonEmptyScene));
    }

    #[test]
    fn bounding_boxes() {
        let b = obj(0, (300, 300), 100, 100).bounding_box();
        assert_eq!((b.top_left, b.bottom_right), (Point::new(250, 250), Point::new(350, 350)));
        let b = obj(0, (300, 300), 100, 50).bounding_box();
        assert_eq!((b.top_left, b.bottom_right), (Point::new(250, 275), Point::new(350, 325)));
        let b = obj(0, (10, 10), 30, 30).bounding_box();
        assert_eq!((b.top_left, b.bottom_right), (Point::new(-5, -5), Point::new(25, 25)));
        // odd extents keep the full width
        let b = obj(0, (0, 0), 1, 1).bounding_box();
        assert_eq!((b.top_left, b.bottom_right), (Point::new(0, 0), Point::new(1, 1)));
    }

    #[test]
    fn overlap_needs_positive_area() {
        let a = obj(0, (300, 300), 100, 100);
        assert!(a.overlaps(&obj(1, (360, 300), 100, 100)));
        assert!(!a.overlaps(&obj(1, (400, 300), 100, 100)));
        assert!(a.overlaps(&a));
    }

    #[test]
    fn bounds_allow_touching_edges() {
        let c = canvas(600, 600);
        assert!(obj(0, (50, 50), 100, 100).within_bounds(&c));
        assert!(!obj(0, (40, 50), 100, 100).within_bounds(&c));
        assert!(obj(0, (550, 550), 100, 100).within_bounds(&c));
    }

    #[test]
    fn move_steps_and_edge_blocking() {
        let mut scene = Scene::new(canvas(600, 600));
        scene.place_first(obj(0, (0, 0), 100, 100)).unwrap();
        let dog = ObjectId(0);
        assert_eq!(
            scene.move_object(dog, Direction::Right, 20).unwrap(),
            MoveOutcome::Moved(Point::new(320, 300))
        );

        let mut edge = Scene::new(canvas(600, 600));
        edge.place_at(obj(0, (0, 0), 100, 100), Point::new(50, 300)).unwrap();
        assert_eq!(
            edge.move_object(dog, Direction::Left, 20).unwrap(),
            MoveOutcome::BlockedAtEdge
        );
        assert_eq!(edge.get(dog).unwrap().center, Point::new(50, 300));
        assert_eq!(
            edge.move_object(ObjectId(9), Direction::Left, 20),
            Err(SceneError::UnknownObject(ObjectId(9)))
        );
    }

    #[test]
    fn move_reports_overlap_without_blocking() {
        let mut scene = Scene::new(canvas(600, 600));
        scene.place_first(obj(0, (0, 0), 100, 100)).unwrap();
        scene.place_at(obj(1, (0, 0), 100, 100), Point::new(180, 300)).unwrap();
        let bowl = ObjectId(1);
        // edges touching at x=250 is not an overlap
        assert_eq!(
            scene.move_object(bowl, Direction::Right, 20).unwrap(),
            MoveOutcome::Moved(Point::new(200, 300))
        );
        assert_eq!(
            scene.move_object(bowl, Direction::Right, 20).unwrap(),
            MoveOutcome::MovedWithOverlap(Point::new(220, 300), vec![ObjectId(0)])
        );
    }

    #[test]
    fn resize_keeps_aspect() {
        let mut scene = Scene::new(canvas(600, 600));
        scene.place_first(obj(0, (0, 0), 100, 100)).unwrap();
        scene.place_at(obj(1, (0, 0), 100, 50), Point::new(100, 100)).unwrap();
        assert_eq!(
            scene.resize_object(ObjectId(0), ResizeDirection::Increase, 10).unwrap(),
            ResizeOutcome::Resized(Size2D::new(110, 110))
        );
        match scene.resize_object(ObjectId(1), ResizeDirection::Increase, 10).unwrap() {
            ResizeOutcome::Resized(s) => assert_eq!((s.width, s.height), (110, 55)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn resize_floor_and_edges() {
        let mut scene = Scene::new(canvas(600, 600));
        scene.place_first(obj(0, (0, 0), 15, 15)).unwrap();
        assert_eq!(
            scene.resize_object(ObjectId(0), ResizeDirection::Decrease, 10).unwrap(),
            ResizeOutcome::AtMinimum
        );
        assert_eq!(scene.get(ObjectId(0)).unwrap().size.width, 15);

        let mut edge = Scene::new(canvas(600, 600));
        edge.place_at(obj(0, (0, 0), 100, 100), Point::new(50, 300)).unwrap();
        assert_eq!(
            edge.resize_object(ObjectId(0), ResizeDirection::Increase, 10).unwrap(),
            ResizeOutcome::BlockedAtEdge
        );
    }

    #[test]
    fn placement_clamps_into_canvas() {
        let mut scene = Scene::new(canvas(600, 600));
        scene.place_at(obj(0, (0, 0), 100, 100), Point::new(-40, 700)).unwrap();
        assert_eq!(scene.get(ObjectId(0)).unwrap().center, Point::new(50, 550));
        assert!(scene.objects()[0].within_bounds(&scene.config));
    }

    #[test]
    fn config_validation_and_shrinking() {
        assert!(canvas(50, 600).validate().is_err());
        let mut c = canvas(600, 600);
        c.speech_rate = 4;
        assert!(c.validate().is_err());

        let mut scene = Scene::new(canvas(600, 600));
        scene.place_first(obj(0, (0, 0), 100, 100)).unwrap();
        assert!(scene.set_config(canvas(300, 300)).is_err());
        assert!(scene.set_config(canvas(350, 350)).is_ok());
    }

    #[test]
    fn z_order_is_ascending() {
        let mut scene = Scene::new(canvas(600, 600));
        scene.place_first(obj(0, (0, 0), 100, 100)).unwrap();
        scene.place_at(obj(1, (0, 0), 100, 100), Point::new(100, 100)).unwrap();
        scene.place_at(obj(2, (0, 0), 100, 100), Point::new(100, 100)).unwrap();
        let zs: Vec<_> = scene.objects().iter().map(|o| o.z).collect();
        assert_eq!(zs, vec![0, 1, 2]);
        assert!(Scene::from_parts(scene.config, scene.objects().to_vec()).is_ok());
        let mut dup = scene.objects().to_vec();
        dup[2].id = ObjectId(0);
        assert!(Scene::from_parts(scene.config, dup).is_err());
    }
}
