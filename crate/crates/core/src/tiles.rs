//! The tile view: a sparse grid in which every occupied tile stands in for
//! exactly one scene object.
//!
//! Tiles are uniform. Their coordinates encode only the relative order of
//! objects on the canvas, never distance or size. Occupying a tile creates its
//! eight neighbors so there is always somewhere adjacent to place the next
//! object.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{Direction, ObjectId, Scene, SceneError, SceneObject};

/// Canvas distance an object travels when its tile is pushed one step.
pub const PUSH_STEP: i64 = 120;
/// Maximum spread of center coordinates that share a tile row or column
/// after relayout.
pub const CLUSTER_THRESHOLD: i64 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TileCoord {
    pub row: i64,
    pub col: i64,
}

impl TileCoord {
    pub const ORIGIN: TileCoord = TileCoord { row: 0, col: 0 };

    pub const fn new(row: i64, col: i64) -> Self {
        TileCoord { row, col }
    }

    pub fn step(self, direction: Direction) -> TileCoord {
        let (dx, dy) = direction.delta();
        TileCoord::new(self.row + dy, self.col + dx)
    }

    pub fn neighbors(self) -> impl Iterator<Item = TileCoord> {
        (-1..=1).flat_map(move |dr| {
            (-1..=1)
                .filter(move |&dc| dr != 0 || dc != 0)
                .map(move |dc| TileCoord::new(self.row + dr, self.col + dc))
        })
    }

    pub fn chebyshev(self, other: TileCoord) -> i64 {
        (self.row - other.row).abs().max((self.col - other.col).abs())
    }
}

impl fmt::Display for TileCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tile {
    Empty,
    Occupied(ObjectId),
}

impl Tile {
    pub fn object(self) -> Option<ObjectId> {
        match self {
            Tile::Empty => None,
            Tile::Occupied(id) => Some(id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TileError {
    #[error("no tile at {0}")]
    UnknownTile(TileCoord),
    #[error("tile {0} is already occupied")]
    TileOccupied(TileCoord),
    #[error("object {0} already has a tile")]
    DuplicateObject(ObjectId),
    #[error("tile {0} does not hold an object")]
    NotAnObjectTile(TileCoord),
    #[error("push would move an object off the canvas")]
    PushBlockedAtCanvasEdge,
    #[error(transparent)]
    Scene(#[from] SceneError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NavOutcome {
    MovedToEmpty(TileCoord),
    MovedToObject(TileCoord, ObjectId),
    EdgeBump,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "GridRepr", try_from = "GridRepr")]
pub struct TileGrid {
    tiles: BTreeMap<TileCoord, Tile>,
    cursor: TileCoord,
}

impl Default for TileGrid {
    fn default() -> Self {
        TileGrid::init()
    }
}

impl TileGrid {
    /// A single empty tile at the origin with the cursor on it.
    pub fn init() -> Self {
        TileGrid {
            tiles: BTreeMap::from([(TileCoord::ORIGIN, Tile::Empty)]),
            cursor: TileCoord::ORIGIN,
        }
    }

    pub fn cursor(&self) -> TileCoord {
        self.cursor
    }

    pub fn tile(&self, coord: TileCoord) -> Option<Tile> {
        self.tiles.get(&coord).copied()
    }

    pub fn tiles(&self) -> impl Iterator<Item = (TileCoord, Tile)> + '_ {
        self.tiles.iter().map(|(c, t)| (*c, *t))
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn object_at(&self, coord: TileCoord) -> Option<ObjectId> {
        self.tile(coord).and_then(Tile::object)
    }

    pub fn object_under_cursor(&self) -> Option<ObjectId> {
        self.object_at(self.cursor)
    }

    pub fn occupied(&self) -> impl Iterator<Item = (TileCoord, ObjectId)> + '_ {
        self.tiles.iter().filter_map(|(c, t)| t.object().map(|id| (*c, id)))
    }

    pub fn coord_of(&self, id: ObjectId) -> Option<TileCoord> {
        self.occupied().find(|(_, o)| *o == id).map(|(c, _)| c)
    }

    /// Moves the cursor onto the tile holding `id`, if any.
    pub fn focus_object(&mut self, id: ObjectId) -> bool {
        match self.coord_of(id) {
            Some(coord) => {
                self.cursor = coord;
                true
            }
            None => false,
        }
    }

    fn add_neighbors(&mut self, coord: TileCoord) {
        for n in coord.neighbors() {
            self.tiles.entry(n).or_insert(Tile::Empty);
        }
    }

    /// Assigns an object to an empty tile and creates its eight neighbors.
    pub fn occupy(&mut self, coord: TileCoord, id: ObjectId) -> Result<(), TileError> {
        match self.tiles.get(&coord) {
            None => return Err(TileError::UnknownTile(coord)),
            Some(Tile::Occupied(_)) => return Err(TileError::TileOccupied(coord)),
            Some(Tile::Empty) => {}
        }
        if self.coord_of(id).is_some() {
            return Err(TileError::DuplicateObject(id));
        }
        self.tiles.insert(coord, Tile::Occupied(id));
        self.add_neighbors(coord);
        Ok(())
    }

    /// Moves the cursor one tile. Stepping off the existing tiles leaves the
    /// cursor where it is. Diagonals take two moves.
    pub fn navigate(&mut self, direction: Direction) -> NavOutcome {
        let target = self.cursor.step(direction);
        match self.tiles.get(&target) {
            None => NavOutcome::EdgeBump,
            Some(tile) => {
                self.cursor = target;
                match tile {
                    Tile::Empty => NavOutcome::MovedToEmpty(target),
                    Tile::Occupied(id) => NavOutcome::MovedToObject(target, *id),
                }
            }
        }
    }

    /// Shifts the object at `coord` one tile in `direction`, cascading through
    /// any occupied tiles in the way. Every shifted object also moves
    /// [`PUSH_STEP`] pixels on the canvas. Either everything moves or nothing
    /// does. Returns the moved objects, nearest first.
    pub fn push(&mut self, scene: &mut Scene, coord: TileCoord, direction: Direction) -> Result<Vec<ObjectId>, TileError> {
        if self.object_at(coord).is_none() {
            return Err(TileError::NotAnObjectTile(coord));
        }
        let mut run = Vec::new();
        let mut at = coord;
        while let Some(id) = self.object_at(at) {
            run.push((at, id));
            at = at.step(direction);
        }
        let ids: Vec<ObjectId> = run.iter().map(|(_, id)| *id).collect();
        let (dx, dy) = direction.delta();
        if !scene.translate_all(&ids, dx * PUSH_STEP, dy * PUSH_STEP)? {
            return Err(TileError::PushBlockedAtCanvasEdge);
        }
        for (from, _) in &run {
            self.tiles.insert(*from, Tile::Empty);
        }
        for (from, id) in &run {
            let to = from.step(direction);
            self.tiles.insert(to, Tile::Occupied(*id));
            self.add_neighbors(to);
        }
        Ok(ids)
    }

    /// Removes the object at `coord` from the scene and empties its tile.
    /// Empty tiles no longer adjacent to any object are pruned, except the
    /// origin.
    pub fn delete_at(&mut self, scene: &mut Scene, coord: TileCoord) -> Result<SceneObject, TileError> {
        let id = self.object_at(coord).ok_or(TileError::NotAnObjectTile(coord))?;
        let removed = scene.remove(id)?;
        self.tiles.insert(coord, Tile::Empty);
        self.prune();
        Ok(removed)
    }

    fn prune(&mut self) {
        let keep: BTreeSet<TileCoord> = self
            .occupied()
            .flat_map(|(c, _)| std::iter::once(c).chain(c.neighbors()))
            .chain(std::iter::once(TileCoord::ORIGIN))
            .collect();
        self.tiles.retain(|c, _| keep.contains(c));
        if self.tiles.is_empty() {
            self.tiles.insert(TileCoord::ORIGIN, Tile::Empty);
        }
        if !self.tiles.contains_key(&self.cursor) {
            self.cursor = self.default_cursor();
        }
    }

    fn default_cursor(&self) -> TileCoord {
        self.occupied()
            .map(|(c, _)| c)
            .next()
            .or_else(|| self.tiles.keys().next().copied())
            .unwrap_or(TileCoord::ORIGIN)
    }

    /// Rebuilds the grid from object centers, keeping the cursor on its
    /// coordinate when that coordinate still exists.
    pub fn relayout(&self, scene: &Scene) -> TileGrid {
        let mut grid = relayout_from_scene(scene);
        if grid.tiles.contains_key(&self.cursor) {
            grid.cursor = self.cursor;
        }
        grid
    }

    /// Checks the structural invariants against `scene`: a bijection between
    /// occupied tiles and objects, eight neighbors around every object, and a
    /// cursor on an existing tile.
    pub fn check(&self, scene: &Scene) -> Result<(), String> {
        let mut seen = BTreeSet::new();
        for (coord, id) in self.occupied() {
            if scene.get(id).is_none() {
                return Err(format!("tile {coord} holds unknown object {id}"));
            }
            if !seen.insert(id) {
                return Err(format!("object {id} occupies more than one tile"));
            }
            if let Some(missing) = coord.neighbors().find(|n| !self.tiles.contains_key(n)) {
                return Err(format!("tile {coord} is missing neighbor {missing}"));
            }
        }
        if seen.len() != scene.len() {
            return Err(format!("{} objects but {} occupied tiles", scene.len(), seen.len()));
        }
        if !self.tiles.contains_key(&self.cursor) {
            return Err(format!("cursor {} is not on a tile", self.cursor));
        }
        Ok(())
    }
}

/// Groups sorted values so that every group spans at most `threshold`,
/// returning the group index of each input value.
fn cluster_ranks(values: &[i64], threshold: i64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by_key(|&i| values[i]);
    let mut ranks = vec![0; values.len()];
    let mut group = 0;
    let mut start: Option<i64> = None;
    for i in order {
        let v = values[i];
        match start {
            Some(s) if v - s <= threshold => {}
            Some(_) => {
                group += 1;
                start = Some(v);
            }
            None => start = Some(v),
        }
        ranks[i] = group;
    }
    ranks
}

/// Derives tile coordinates from object centers.
///
/// Centers are grouped into columns by x and rows by y; a group starts at its
/// smallest value and takes every later value within [`CLUSTER_THRESHOLD`].
/// Objects that land on the same tile are spread across extra columns in z
/// order, and those extra columns are reserved for the whole column group so
/// left-to-right order stays consistent across rows.
pub fn relayout_from_scene(scene: &Scene) -> TileGrid {
    let objects = scene.objects();
    if objects.is_empty() {
        return TileGrid::init();
    }
    let xs: Vec<i64> = objects.iter().map(|o| o.center.x).collect();
    let ys: Vec<i64> = objects.iter().map(|o| o.center.y).collect();
    let col_group = cluster_ranks(&xs, CLUSTER_THRESHOLD);
    let row_group = cluster_ranks(&ys, CLUSTER_THRESHOLD);

    // objects are already in ascending z order
    let mut cells: BTreeMap<(usize, usize), Vec<ObjectId>> = BTreeMap::new();
    for (i, obj) in objects.iter().enumerate() {
        cells.entry((col_group[i], row_group[i])).or_default().push(obj.id);
    }
    let groups = col_group.iter().max().map_or(0, |m| m + 1);
    let mut widths = vec![1usize; groups];
    for ((c, _), ids) in &cells {
        widths[*c] = widths[*c].max(ids.len());
    }
    let mut offsets = Vec::with_capacity(groups);
    let mut acc = 0usize;
    for w in &widths {
        offsets.push(acc);
        acc += w;
    }

    let mut grid = TileGrid {
        tiles: BTreeMap::new(),
        cursor: TileCoord::ORIGIN,
    };
    for ((c, r), ids) in &cells {
        for (k, id) in ids.iter().enumerate() {
            let coord = TileCoord::new(*r as i64, (offsets[*c] + k) as i64);
            grid.tiles.insert(coord, Tile::Occupied(*id));
        }
    }
    let occupied: Vec<TileCoord> = grid.occupied().map(|(c, _)| c).collect();
    for c in occupied {
        grid.add_neighbors(c);
    }
    grid.cursor = grid.default_cursor();
    grid
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    tiles: Vec<(i64, i64, Option<ObjectId>)>,
    cursor: TileCoord,
}

impl From<TileGrid> for GridRepr {
    fn from(grid: TileGrid) -> Self {
        GridRepr {
            tiles: grid.tile_rows(),
            cursor: grid.cursor,
        }
    }
}

impl TryFrom<GridRepr> for TileGrid {
    type Error = String;

    fn try_from(repr: GridRepr) -> Result<Self, Self::Error> {
        TileGrid::from_tile_rows(repr.tiles, repr.cursor)
    }
}

impl TileGrid {
    /// Tiles as `(row, col, object)` in coordinate order.
    pub fn tile_rows(&self) -> Vec<(i64, i64, Option<ObjectId>)> {
        self.tiles.iter().map(|(c, t)| (c.row, c.col, t.object())).collect()
    }

    /// Rebuilds a grid from [`TileGrid::tile_rows`] output. Only the
    /// structure is checked here; use [`TileGrid::check`] against a scene for
    /// the full invariants.
    pub fn from_tile_rows(rows: Vec<(i64, i64, Option<ObjectId>)>, cursor: TileCoord) -> Result<Self, String> {
        let mut tiles = BTreeMap::new();
        for (row, col, id) in rows {
            let tile = id.map_or(Tile::Empty, Tile::Occupied);
            if tiles.insert(TileCoord::new(row, col), tile).is_some() {
                return Err(format!("duplicate tile ({row}, {col})"));
            }
        }
        if !tiles.contains_key(&cursor) {
            return Err(format!("cursor {cursor} is not on a tile"));
        }
        Ok(TileGrid { tiles, cursor })
    }
}
