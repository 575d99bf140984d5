//! Seed-deterministic stand-in for the generative services.
//!
//! Every output is a pure function of the call's arguments and the seed, so
//! a session replayed against the mock reproduces byte for byte.

use sha2::{Digest, Sha256};

use super::{GenBackend, GenError, RewrittenPrompt};
use crate::feedback::fallback_global_description;
use crate::render::raster::{hue_color, tint, RasterImage};
use crate::render::instruction_hue;
use crate::scene::{ImageStyle, Scene, SceneObject, DEFAULT_OBJECT_SIZE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MockBackend {
    seed: u64,
}

impl MockBackend {
    pub fn new(seed: u64) -> Self {
        MockBackend { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn digest(&self, subject: &str) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(subject.as_bytes());
        hasher.update(self.seed.to_le_bytes());
        hasher.finalize().into()
    }
}

fn encode(img: &RasterImage) -> Result<Vec<u8>, GenError> {
    img.to_png().map_err(|e| GenError::Malformed(e.to_string()))
}

fn decode(png: &[u8]) -> Result<RasterImage, GenError> {
    RasterImage::from_png(png).map_err(|e| GenError::Malformed(e.to_string()))
}

/// Procedural silhouette: two overlapping ellipses sized and placed from the
/// digest, outlined for tactile style and filled for color style.
fn silhouette(digest: &[u8; 32], style: ImageStyle) -> RasterImage {
    let side = DEFAULT_OBJECT_SIZE as u32;
    let mut img = RasterImage::white(side, side);
    let c = side as f64 / 2.0;
    let shapes = [
        (c, c, 18.0 + (digest[0] % 24) as f64, 18.0 + (digest[1] % 24) as f64),
        (
            c + (digest[2] % 30) as f64 - 15.0,
            c + (digest[3] % 30) as f64 - 15.0,
            8.0 + (digest[4] % 12) as f64,
            8.0 + (digest[5] % 12) as f64,
        ),
    ];
    let inside = |x: f64, y: f64, (cx, cy, rx, ry): (f64, f64, f64, f64)| {
        let (dx, dy) = ((x - cx) / rx, (y - cy) / ry);
        dx * dx + dy * dy <= 1.0
    };
    let fill = hue_color(u16::from_be_bytes([digest[6], digest[7]]) % 360);
    for y in 0..side {
        for x in 0..side {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let hit = shapes.iter().any(|&s| inside(px, py, s));
            if !hit {
                continue;
            }
            let rgba = match style {
                ImageStyle::Color => [fill[0], fill[1], fill[2], 255],
                ImageStyle::Tactile => {
                    let border = [(-1.5, 0.0), (1.5, 0.0), (0.0, -1.5), (0.0, 1.5)]
                        .iter()
                        .any(|(dx, dy)| !shapes.iter().any(|&s| inside(px + dx, py + dy, s)));
                    if !border {
                        continue;
                    }
                    [0, 0, 0, 255]
                }
            };
            img.set_pixel(x, y, rgba);
        }
    }
    img
}

/// Clears every pixel connected to the border that matches the top-left
/// corner color.
fn clear_border_color(img: &mut RasterImage) {
    let (w, h) = (img.width(), img.height());
    if w == 0 || h == 0 {
        return;
    }
    let bg = img.pixel(0, 0);
    let mut seen = vec![false; (w * h) as usize];
    let mut stack: Vec<(u32, u32)> = Vec::new();
    for x in 0..w {
        stack.push((x, 0));
        stack.push((x, h - 1));
    }
    for y in 0..h {
        stack.push((0, y));
        stack.push((w - 1, y));
    }
    while let Some((x, y)) = stack.pop() {
        let i = (y * w + x) as usize;
        if seen[i] || img.pixel(x, y) != bg {
            continue;
        }
        seen[i] = true;
        img.set_pixel(x, y, [bg[0], bg[1], bg[2], 0]);
        if x > 0 {
            stack.push((x - 1, y));
        }
        if y > 0 {
            stack.push((x, y - 1));
        }
        if x + 1 < w {
            stack.push((x + 1, y));
        }
        if y + 1 < h {
            stack.push((x, y + 1));
        }
    }
}

impl GenBackend for MockBackend {
    fn generate_image(&self, prompt: &RewrittenPrompt, style: ImageStyle) -> Result<Vec<u8>, GenError> {
        encode(&silhouette(&self.digest(&prompt.name()), style))
    }

    fn remove_background(&self, png: &[u8]) -> Result<Vec<u8>, GenError> {
        let mut img = decode(png)?;
        clear_border_color(&mut img);
        encode(&img)
    }

    fn describe_image(&self, _png: &[u8], subject: &str, style: ImageStyle) -> Result<String, GenError> {
        Ok(match style {
            ImageStyle::Tactile => format!("A simple line drawing of a {subject}."),
            ImageStyle::Color => format!("A colorful illustration of a {subject}."),
        })
    }

    fn describe_canvas(&self, scene: &Scene, _snapshot_png: &[u8]) -> Result<String, GenError> {
        Ok(fallback_global_description(scene))
    }

    fn answer_question(&self, obj: &SceneObject, _image_png: Option<&[u8]>, question: &str) -> Result<String, GenError> {
        if question.trim().is_empty() {
            return Err(GenError::EmptyTranscript);
        }
        Ok(format!("About {}: {} — {}", obj.name, question.trim(), obj.description))
    }

    fn render_background(&self, snapshot_png: &[u8], instruction: &str) -> Result<Vec<u8>, GenError> {
        let img = decode(snapshot_png)?;
        encode(&tint(&img, instruction_hue(instruction)))
    }
}
