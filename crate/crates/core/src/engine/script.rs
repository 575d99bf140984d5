//! Command script files.
//!
//! ```text
//! # comment
//! @width 600
//! @height 600
//! @style tactile
//! @rate 2
//! @seed 7
//! @backend mock
//! 0	Enter
//! 1	Transcript	Create an image of a dog
//! 2	Enter
//! 3	Arrow	right
//! ```
//!
//! Header lines start with `@` and must come before the first command.
//! Command records are `seq<TAB>name[<TAB>payload]`; sequence numbers start
//! at 0 and increase by one. `Arrow` and `ShiftArrow` take a direction
//! payload, `Transcript` takes the spoken text with `\t`, `\n` and `\\`
//! escapes, `Settings` takes `width height style rate`. Every other command
//! takes no payload. Blank lines and lines starting with `#` are ignored.
#![allow(clippy::tabs_in_doc_comments)]

use std::fmt::Write as _;

use thiserror::Error;

use super::Command;
use crate::genai::BackendKind;
use crate::scene::{CanvasConfig, Direction, ImageStyle};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Script {
    pub config: CanvasConfig,
    pub seed: u64,
    pub backend: BackendKind,
    pub commands: Vec<Command>,
}

impl Default for Script {
    fn default() -> Self {
        Script {
            config: CanvasConfig::default(),
            seed: 0,
            backend: BackendKind::Mock,
            commands: Vec::new(),
        }
    }
}

fn unescape(s: &str) -> Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('\\') => out.push('\\'),
            Some(other) => return Err(format!("unknown escape `\\{other}`")),
            None => return Err("payload ends with a lone backslash".into()),
        }
    }
    Ok(out)
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('\t', "\\t").replace('\n', "\\n")
}

fn parse_settings(payload: &str) -> Result<CanvasConfig, String> {
    let parts: Vec<&str> = payload.split_whitespace().collect();
    let [w, h, style, rate] = parts.as_slice() else {
        return Err("Settings takes `width height style rate`".into());
    };
    Ok(CanvasConfig {
        width: w.parse().map_err(|_| format!("bad width `{w}`"))?,
        height: h.parse().map_err(|_| format!("bad height `{h}`"))?,
        image_style: style.parse()?,
        speech_rate: rate.parse().map_err(|_| format!("bad speech rate `{rate}`"))?,
    })
}

/// Parses one command name and payload.
pub fn parse_command(name: &str, payload: Option<&str>) -> Result<Command, String> {
    let direction = || -> Result<Direction, String> {
        payload
            .ok_or_else(|| format!("{name} needs a direction"))?
            .trim()
            .parse()
    };
    let cmd = match name {
        "Enter" => Command::Enter,
        "ShiftG" => Command::ShiftG,
        "ShiftI" => Command::ShiftI,
        "ShiftR" => Command::ShiftR,
        "ShiftC" => Command::ShiftC,
        "ShiftL" => Command::ShiftL,
        "ShiftS" => Command::ShiftS,
        "ShiftK" => Command::ShiftK,
        "ShiftX" => Command::ShiftX,
        "Shift" => Command::Shift,
        "Escape" => Command::Escape,
        "Arrow" => return Ok(Command::Arrow { direction: direction()? }),
        "ShiftArrow" => return Ok(Command::ShiftArrow { direction: direction()? }),
        "Transcript" => {
            let text = unescape(payload.unwrap_or(""))?;
            return Ok(Command::TranscriptArrived { text });
        }
        "Settings" => {
            let config = parse_settings(payload.ok_or("Settings needs a payload")?)?;
            return Ok(Command::UpdateSettings { config });
        }
        "GenerationArrived" | "DescriptionArrived" => {
            return Err(format!("{name} is produced by the backend and cannot be scripted"))
        }
        other => return Err(format!("unknown command `{other}`")),
    };
    match payload {
        Some(p) if !p.is_empty() => Err(format!("{name} takes no payload")),
        _ => Ok(cmd),
    }
}

/// Script form of a command, or `None` for backend results.
pub fn format_command(cmd: &Command) -> Option<(String, Option<String>)> {
    let bare = |n: &str| Some((n.to_string(), None));
    match cmd {
        Command::Enter => bare("Enter"),
        Command::ShiftG => bare("ShiftG"),
        Command::ShiftI => bare("ShiftI"),
        Command::ShiftR => bare("ShiftR"),
        Command::ShiftC => bare("ShiftC"),
        Command::ShiftL => bare("ShiftL"),
        Command::ShiftS => bare("ShiftS"),
        Command::ShiftK => bare("ShiftK"),
        Command::ShiftX => bare("ShiftX"),
        Command::Shift => bare("Shift"),
        Command::Escape => bare("Escape"),
        Command::Arrow { direction } => Some(("Arrow".into(), Some(direction.to_string()))),
        Command::ShiftArrow { direction } => Some(("ShiftArrow".into(), Some(direction.to_string()))),
        Command::TranscriptArrived { text } => Some(("Transcript".into(), Some(escape(text)))),
        Command::UpdateSettings { config } => Some((
            "Settings".into(),
            Some(format!(
                "{} {} {} {}",
                config.width,
                config.height,
                config.image_style.as_str(),
                config.speech_rate
            )),
        )),
        Command::GenerationArrived { .. } | Command::DescriptionArrived { .. } => None,
    }
}

impl Script {
    pub fn parse(text: &str) -> Result<Script, ScriptError> {
        let mut script = Script::default();
        let mut expected_seq = 0u64;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| ScriptError { line: line_no, message };
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            if let Some(header) = line.strip_prefix('@') {
                if !script.commands.is_empty() {
                    return Err(err("header lines must come before commands".into()));
                }
                let (key, value) = header
                    .split_once(char::is_whitespace)
                    .map(|(k, v)| (k, v.trim()))
                    .ok_or_else(|| err(format!("header `@{header}` has no value")))?;
                let bad = |what: &str| err(format!("bad {what} `{value}`"));
                match key {
                    "width" => script.config.width = value.parse().map_err(|_| bad("width"))?,
                    "height" => script.config.height = value.parse().map_err(|_| bad("height"))?,
                    "style" => script.config.image_style = value.parse::<ImageStyle>().map_err(err)?,
                    "rate" => script.config.speech_rate = value.parse().map_err(|_| bad("speech rate"))?,
                    "seed" => script.seed = value.parse().map_err(|_| bad("seed"))?,
                    "backend" => script.backend = value.parse().map_err(err)?,
                    other => return Err(err(format!("unknown header `@{other}`"))),
                }
                continue;
            }
            let mut fields = line.splitn(3, '\t');
            let seq_field = fields.next().unwrap_or_default().trim();
            let seq: u64 = seq_field
                .parse()
                .map_err(|_| err(format!("expected a sequence number, found `{seq_field}`")))?;
            if seq != expected_seq {
                return Err(err(format!("sequence number {seq} out of order, expected {expected_seq}")));
            }
            let name = fields
                .next()
                .map(str::trim)
                .filter(|n| !n.is_empty())
                .ok_or_else(|| err("missing command name".into()))?;
            let cmd = parse_command(name, fields.next()).map_err(err)?;
            script.commands.push(cmd);
            expected_seq += 1;
        }
        script
            .config
            .validate()
            .map_err(|e| ScriptError {
                line: 0,
                message: e.to_string(),
            })?;
        Ok(script)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        let _ = writeln!(out, "@width {}", c.width);
        let _ = writeln!(out, "@height {}", c.height);
        let _ = writeln!(out, "@style {}", c.image_style.as_str());
        let _ = writeln!(out, "@rate {}", c.speech_rate);
        let _ = writeln!(out, "@seed {}", self.seed);
        let _ = writeln!(out, "@backend {}", self.backend.as_str());
        let scripted = self.commands.iter().filter_map(format_command);
        for (seq, (name, payload)) in scripted.enumerate() {
            match payload {
                Some(p) => {
                    let _ = writeln!(out, "{seq}\t{name}\t{p}");
                }
                None => {
                    let _ = writeln!(out, "{seq}\t{name}");
                }
            }
        }
        out
    }
}
