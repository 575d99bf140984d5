//! Post-conditions on a finished scene, read from a checks file.
//!
//! ```text
//! # one check per line; names with spaces go in double quotes
//! count 3
//! min_size dog 150
//! left_of bowl dog
//! above clock dog
//! no_overlap
//! no_overlap bowl dog
//! overlaps "potted plant" table
//! region clock top
//! region window top-left
//! ```
//!
//! `min_size` compares the larger dimension. `left_of` and `above` require
//! the first box to end at or before the second box starts. `region` takes a
//! row (`top`, `middle`, `bottom`), a column (`left`, `center`, `right`) or
//! both joined by `-`, and tests which third of the canvas the center is in.

use thiserror::Error;

use crate::feedback::third;
use crate::scene::{Scene, SceneObject};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct CheckParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Check {
    Count(usize),
    MinSize(String, i64),
    LeftOf(String, String),
    Above(String, String),
    NoOverlapAll,
    NoOverlap(String, String),
    Overlaps(String, String),
    Region {
        name: String,
        row: Option<usize>,
        col: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub line: usize,
    pub check: String,
    pub failure: Option<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

fn tokenize(line: &str) -> Result<Vec<String>, String> {
    let mut tokens = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '"' {
            chars.next();
            let mut token = String::new();
            loop {
                match chars.next() {
                    Some('"') => break,
                    Some(ch) => token.push(ch),
                    None => return Err("unterminated quote".into()),
                }
            }
            tokens.push(token);
        } else {
            let mut token = String::new();
            while let Some(&ch) = chars.peek() {
                if ch.is_whitespace() {
                    break;
                }
                token.push(ch);
                chars.next();
            }
            tokens.push(token);
        }
    }
    Ok(tokens)
}

fn parse_region(spec: &str) -> Result<(Option<usize>, Option<usize>), String> {
    let row = |s: &str| match s {
        "top" => Some(0),
        "middle" => Some(1),
        "bottom" => Some(2),
        _ => None,
    };
    let col = |s: &str| match s {
        "left" => Some(0),
        "center" => Some(1),
        "right" => Some(2),
        _ => None,
    };
    let bad = || format!("unknown region `{spec}`");
    match spec.split_once('-') {
        Some((r, c)) => Ok((Some(row(r).ok_or_else(bad)?), Some(col(c).ok_or_else(bad)?))),
        None => match (row(spec), col(spec)) {
            (Some(r), _) => Ok((Some(r), None)),
            (_, Some(c)) => Ok((None, Some(c))),
            _ => Err(bad()),
        },
    }
}

impl Check {
    fn parse_tokens(tokens: &[String]) -> Result<Check, String> {
        let t: Vec<&str> = tokens.iter().map(String::as_str).collect();
        let number = |s: &str| s.parse::<i64>().map_err(|_| format!("expected a number, found `{s}`"));
        Ok(match t.as_slice() {
            ["count", n] => Check::Count(number(n)?.try_into().map_err(|_| "count must be non-negative")?),
            ["min_size", name, px] => Check::MinSize(name.to_string(), number(px)?),
            ["left_of", a, b] => Check::LeftOf(a.to_string(), b.to_string()),
            ["above", a, b] => Check::Above(a.to_string(), b.to_string()),
            ["no_overlap"] => Check::NoOverlapAll,
            ["no_overlap", a, b] => Check::NoOverlap(a.to_string(), b.to_string()),
            ["overlaps", a, b] => Check::Overlaps(a.to_string(), b.to_string()),
            ["region", name, spec] => {
                let (row, col) = parse_region(spec)?;
                Check::Region {
                    name: name.to_string(),
                    row,
                    col,
                }
            }
            [op, ..] => return Err(format!("unknown or malformed check `{op}`")),
            [] => return Err("empty check".into()),
        })
    }

    pub fn parse_file(text: &str) -> Result<Vec<(usize, String, Check)>, CheckParseError> {
        let mut out = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| CheckParseError { line: i + 1, message };
            let tokens = tokenize(line).map_err(err)?;
            out.push((i + 1, line.to_string(), Check::parse_tokens(&tokens).map_err(err)?));
        }
        Ok(out)
    }

    pub fn evaluate(&self, scene: &Scene) -> Result<(), String> {
        match self {
            Check::Count(n) => {
                if scene.len() == *n {
                    Ok(())
                } else {
                    Err(format!("expected {n} objects, found {}", scene.len()))
                }
            }
            Check::MinSize(name, px) => {
                let o = find(scene, name)?;
                let d = o.size.max_dimension();
                if d >= *px {
                    Ok(())
                } else {
                    Err(format!("{name} is {} by {}, smaller than {px}", o.size.width, o.size.height))
                }
            }
            Check::LeftOf(a, b) => {
                let (ba, bb) = (find(scene, a)?.bounding_box(), find(scene, b)?.bounding_box());
                if ba.bottom_right.x <= bb.top_left.x {
                    Ok(())
                } else {
                    Err(format!(
                        "{a} ends at x={} but {b} starts at x={}",
                        ba.bottom_right.x, bb.top_left.x
                    ))
                }
            }
            Check::Above(a, b) => {
                let (ba, bb) = (find(scene, a)?.bounding_box(), find(scene, b)?.bounding_box());
                if ba.bottom_right.y <= bb.top_left.y {
                    Ok(())
                } else {
                    Err(format!(
                        "{a} ends at y={} but {b} starts at y={}",
                        ba.bottom_right.y, bb.top_left.y
                    ))
                }
            }
            Check::NoOverlapAll => {
                let objects = scene.objects();
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
                if pairs.is_empty() {
                    Ok(())
                } else {
                    Err(format!("overlapping: {}", pairs.join(", ")))
                }
            }
            Check::NoOverlap(a, b) => {
                if find(scene, a)?.overlaps(find(scene, b)?) {
                    Err(format!("{a} overlaps {b}"))
                } else {
                    Ok(())
                }
            }
            Check::Overlaps(a, b) => {
                if find(scene, a)?.overlaps(find(scene, b)?) {
                    Ok(())
                } else {
                    Err(format!("{a} does not overlap {b}"))
                }
            }
            Check::Region { name, row, col } => {
                let o = find(scene, name)?;
                let (w, h) = (scene.config.width, scene.config.height);
                let (r, c) = (third(o.center.y, h), third(o.center.x, w));
                if row.is_none_or(|want| want == r) && col.is_none_or(|want| want == c) {
                    Ok(())
                } else {
                    Err(format!(
                        "{name} center ({}, {}) is in the {}",
                        o.center.x,
                        o.center.y,
                        crate::feedback::region_name(o.center.x, o.center.y, w, h)
                    ))
                }
            }
        }
    }
}

fn find<'a>(scene: &'a Scene, name: &str) -> Result<&'a SceneObject, String> {
    let mut matches = scene.objects().iter().filter(|o| o.name.eq_ignore_ascii_case(name));
    match (matches.next(), matches.next()) {
        (Some(o), None) => Ok(o),
        (None, _) => Err(format!("no object named {name}")),
        (Some(_), Some(_)) => Err(format!("more than one object named {name}")),
    }
}

/// Evaluates every check in a checks file against `scene`.
pub fn run_checks(text: &str, scene: &Scene) -> Result<Vec<CheckOutcome>, CheckParseError> {
    Ok(Check::parse_file(text)?
        .into_iter()
        .map(|(line, source, check)| CheckOutcome {
            line,
            check: source,
            failure: check.evaluate(scene).err(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{CanvasConfig, ObjectId, Point, Size2D};

    fn scene() -> Scene {
        let mut s = Scene::new(CanvasConfig::default());
        s.place_first(SceneObject::new(ObjectId(0), "dog", Size2D::square(150))).unwrap();
        s.place_at(SceneObject::new(ObjectId(1), "bowl", Size2D::square(100)), Point::new(160, 300))
            .unwrap();
        s.place_at(SceneObject::new(ObjectId(2), "potted plant", Size2D::square(100)), Point::new(300, 100))
            .unwrap();
        s
    }

    #[test]
    fn passing_checks() {
        let text = "count 3\nmin_size dog 150\nleft_of bowl dog\nno_overlap\n\
                    region \"potted plant\" top-center\nregion bowl left\nabove \"potted plant\" dog\n";
        let outcomes = run_checks(text, &scene()).unwrap();
        assert_eq!(outcomes.len(), 7);
        assert!(outcomes.iter().all(CheckOutcome::passed), "{outcomes:?}");
    }

    #[test]
    fn failing_checks_explain() {
        let outcomes = run_checks("min_size bowl 150\noverlaps bowl dog\nregion cat top\n", &scene()).unwrap();
        let failures: Vec<_> = outcomes.iter().filter_map(|o| o.failure.as_deref()).collect();
        assert_eq!(
            failures,
            [
                "bowl is 100 by 100, smaller than 150",
                "bowl does not overlap dog",
                "no object named cat"
            ]
        );
    }

    #[test]
    fn parse_errors_cite_lines() {
        let e = run_checks("count 1\nregion dog upper\n", &scene()).unwrap_err();
        assert_eq!(e.line, 2);
        assert!(Check::parse_file("overlaps \"a b\n").is_err());
    }
}
