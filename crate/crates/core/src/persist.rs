//! Session files.
//!
//! A session is saved as pretty-printed JSON with a fixed field order and a
//! trailing newline, so loading a file and saving it again reproduces the
//! same bytes. Geometry is all integers. The state digest is the SHA-256 of
//! those bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{LogEntry, Mode, Purpose, SessionState};
use crate::feedback::SonificationParams;
use crate::scene::{CanvasConfig, ObjectId, Scene, SceneObject};
use crate::store::content_hash;
use crate::tiles::{TileCoord, TileGrid};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorruptFile {
    #[error("unsupported format_version {found} (this build reads version {FORMAT_VERSION})")]
    Version { found: String },
    #[error("malformed JSON at byte {offset} (line {line}, column {column}): {message}")]
    Syntax {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("bad field: {message}")]
    Field { message: String },
    #[error("inconsistent session: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("corrupt session file: {0}")]
    Corrupt(#[from] CorruptFile),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SessionFile {
    format_version: u64,
    config: CanvasConfig,
    seed: u64,
    next_object_id: u32,
    objects: Vec<SceneObject>,
    tiles: Vec<(i64, i64, Option<ObjectId>)>,
    cursor: TileCoord,
    mode: Mode,
    event_log: Vec<LogEntry>,
}

/// Canonical bytes of a session.
pub fn to_bytes(state: &SessionState) -> Vec<u8> {
    let file = SessionFile {
        format_version: FORMAT_VERSION,
        config: state.scene.config,
        seed: state.seed,
        next_object_id: state.next_object_id,
        objects: state.scene.objects().to_vec(),
        tiles: state.grid.tile_rows(),
        cursor: state.grid.cursor(),
        mode: state.mode.clone(),
        event_log: state.event_log.clone(),
    };
    let mut bytes = serde_json::to_vec_pretty(&file).expect("session files always serialize");
    bytes.push(b'\n');
    bytes
}

/// Hex SHA-256 of the canonical bytes.
pub fn digest(state: &SessionState) -> String {
    content_hash(&to_bytes(state))
}

fn byte_offset(text: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = text
        .split(|b| *b == b'\n')
        .take(line - 1)
        .map(|l| l.len() + 1)
        .sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

fn syntax_error(bytes: &[u8], e: &serde_json::Error) -> CorruptFile {
    let (line, column) = (e.line(), e.column());
    let message = e.to_string();
    let message = message
        .split(" at line ")
        .next()
        .unwrap_or(&message)
        .to_string();
    CorruptFile::Syntax {
        offset: byte_offset(bytes, line, column),
        line,
        column,
        message,
    }
}

fn object_exists(scene: &Scene, id: ObjectId, what: &str) -> Result<(), CorruptFile> {
    scene
        .get(id)
        .map(|_| ())
        .ok_or_else(|| CorruptFile::Inconsistent(format!("{what} refers to unknown object {id}")))
}

/// Parses and validates a session file.
pub fn from_bytes(bytes: &[u8]) -> Result<SessionState, CorruptFile> {
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| syntax_error(bytes, &e))?;
    match value.get("format_version") {
        Some(v) if v.as_u64() == Some(FORMAT_VERSION) => {}
        Some(v) => return Err(CorruptFile::Version { found: v.to_string() }),
        None => {
            return Err(CorruptFile::Field {
                message: "missing field `format_version`".into(),
            })
        }
    }
    let file: SessionFile = serde_json::from_value(value).map_err(|e| CorruptFile::Field {
        message: e.to_string(),
    })?;

    file.config
        .validate()
        .map_err(|e| CorruptFile::Field {
            message: format!("config: {e}"),
        })?;
    let scene = Scene::from_parts(file.config, file.objects).map_err(|e| CorruptFile::Inconsistent(e.to_string()))?;
    if let Some(o) = scene.objects().iter().find(|o| !o.within_bounds(&scene.config)) {
        return Err(CorruptFile::Inconsistent(format!("object {} lies outside the canvas", o.id)));
    }
    if let Some(o) = scene.objects().iter().find(|o| o.id.0 >= file.next_object_id) {
        return Err(CorruptFile::Inconsistent(format!(
            "object {} is not below next_object_id {}",
            o.id, file.next_object_id
        )));
    }
    let grid = TileGrid::from_tile_rows(file.tiles, file.cursor).map_err(CorruptFile::Inconsistent)?;
    grid.check(&scene).map_err(CorruptFile::Inconsistent)?;

    match &file.mode {
        Mode::LocationEdit { object } | Mode::SizeEdit { object } => object_exists(&scene, *object, "mode")?,
        Mode::AwaitTranscript { purpose } | Mode::ConfirmTranscript { purpose, .. } | Mode::AwaitBackend { purpose, .. } => {
            match purpose {
                Purpose::Regenerate { object } | Purpose::Chat { object } => object_exists(&scene, *object, "mode")?,
                Purpose::Generate { tile } if grid.tile(*tile).is_none() => {
                    return Err(CorruptFile::Inconsistent(format!("mode refers to missing tile {tile}")))
                }
                _ => {}
            }
        }
        Mode::HelpList { index: Some(i) } if *i >= crate::engine::HELP_ENTRIES.len() => {
            return Err(CorruptFile::Inconsistent(format!("help index {i} out of range")))
        }
        _ => {}
    }
    if let Some((i, entry)) = file.event_log.iter().enumerate().find(|(i, e)| e.seq != *i as u64) {
        return Err(CorruptFile::Inconsistent(format!(
            "event_log entry {i} has sequence number {}",
            entry.seq
        )));
    }

    Ok(SessionState {
        scene,
        grid,
        mode: file.mode,
        seed: file.seed,
        next_object_id: file.next_object_id,
        event_log: file.event_log,
        sonification: SonificationParams::default(),
    })
}

pub fn save(state: &SessionState, path: &Path) -> Result<(), PersistError> {
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, to_bytes(state))?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<SessionState, PersistError> {
    let bytes = std::fs::read(path)?;
    Ok(from_bytes(&bytes)?)
}
