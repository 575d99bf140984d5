//! Sobel and Canny edge detection.
//!
//! Grayscale conversion and gradients are integer arithmetic with replicated
//! borders, so results are exact and independent of evaluation order.
//! Magnitudes are normalized to 0..=255 by the Sobel full-scale response of
//! 4 * 255 = 1020.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::raster::{GrayImage, RasterImage};
use super::RenderError;

/// Raw Sobel response of an ideal 0 to 255 step.
pub const SOBEL_FULL_SCALE: i32 = 1020;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeAlgorithm {
    Sobel,
    Canny,
}

impl std::str::FromStr for EdgeAlgorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sobel" => Ok(EdgeAlgorithm::Sobel),
            "canny" => Ok(EdgeAlgorithm::Canny),
            other => Err(format!("unknown edge algorithm `{other}` (expected sobel or canny)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeParams {
    pub algorithm: EdgeAlgorithm,
    /// Sobel binarization level on the normalized magnitude.
    pub threshold: u8,
    pub canny_low: u8,
    pub canny_high: u8,
    pub gaussian_sigma: f64,
}

impl Default for EdgeParams {
    fn default() -> Self {
        EdgeParams {
            algorithm: EdgeAlgorithm::Canny,
            threshold: 64,
            canny_low: 50,
            canny_high: 100,
            gaussian_sigma: 1.4,
        }
    }
}

impl EdgeParams {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.canny_low >= self.canny_high {
            return Err(RenderError::InvalidThresholds {
                low: self.canny_low,
                high: self.canny_high,
            });
        }
        if !(self.gaussian_sigma >= 0.0 && self.gaussian_sigma.is_finite()) {
            return Err(RenderError::InvalidSigma(self.gaussian_sigma));
        }
        Ok(())
    }
}

/// Rec. 601 luma, rounded to the nearest integer.
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8
}

/// Grayscale of an RGBA image. Alpha is ignored.
pub fn grayscale(img: &RasterImage) -> GrayImage {
    GrayImage {
        width: img.width(),
        height: img.height(),
        data: img.pixels().chunks_exact(4).map(|p| luma(p[0], p[1], p[2])).collect(),
    }
}

/// Integer plane with replicated borders.
struct Plane<'a> {
    w: i64,
    h: i64,
    data: &'a [i32],
}

impl Plane<'_> {
    fn at(&self, x: i64, y: i64) -> i32 {
        let x = x.clamp(0, self.w - 1);
        let y = y.clamp(0, self.h - 1);
        self.data[(y * self.w + x) as usize]
    }
}

/// Horizontal and vertical Sobel responses for every pixel.
pub fn sobel_gradients(values: &[i32], width: u32, height: u32) -> (Vec<i32>, Vec<i32>) {
    let plane = Plane {
        w: width as i64,
        h: height as i64,
        data: values,
    };
    let n = width as usize * height as usize;
    let mut gx = Vec::with_capacity(n);
    let mut gy = Vec::with_capacity(n);
    for y in 0..plane.h {
        for x in 0..plane.w {
            let p = |dx: i64, dy: i64| plane.at(x + dx, y + dy);
            gx.push((p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1)));
            gy.push((p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1)));
        }
    }
    (gx, gy)
}

fn normalized_magnitude(gx: i32, gy: i32) -> f64 {
    let raw = ((gx as i64 * gx as i64 + gy as i64 * gy as i64) as f64).sqrt();
    raw * 255.0 / SOBEL_FULL_SCALE as f64
}

/// Sobel gradient magnitude scaled to 0..=255.
pub fn sobel_magnitude(gray: &GrayImage) -> GrayImage {
    let values: Vec<i32> = gray.data.iter().map(|&v| v as i32).collect();
    let (gx, gy) = sobel_gradients(&values, gray.width, gray.height);
    GrayImage {
        width: gray.width,
        height: gray.height,
        data: gx
            .iter()
            .zip(&gy)
            .map(|(&x, &y)| normalized_magnitude(x, y).round().min(255.0) as u8)
            .collect(),
    }
}

/// Binary Sobel edge map: 255 where the normalized magnitude reaches
/// `params.threshold`, 0 elsewhere.
pub fn sobel_edges(img: &RasterImage, params: &EdgeParams) -> GrayImage {
    let mut mag = sobel_magnitude(&grayscale(img));
    for v in &mut mag.data {
        *v = if *v >= params.threshold { 255 } else { 0 };
    }
    mag
}

/// Normalized 1-D Gaussian taps over `-radius..=radius`, radius = ceil(3 sigma).
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / sum).collect()
}

/// Separable Gaussian blur with replicated borders, rounded back to integers.
pub fn gaussian_blur(gray: &GrayImage, sigma: f64) -> Vec<i32> {
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as i64;
    let (w, h) = (gray.width as i64, gray.height as i64);
    let src: Vec<f64> = gray.data.iter().map(|&v| v as f64).collect();
    let idx = |x: i64, y: i64| (y.clamp(0, h - 1) * w + x.clamp(0, w - 1)) as usize;

    let mut horizontal = vec![0.0; src.len()];
    for y in 0..h {
        for x in 0..w {
            horizontal[(y * w + x) as usize] = kernel
                .iter()
                .enumerate()
                .map(|(k, t)| t * src[idx(x + k as i64 - radius, y)])
                .sum();
        }
    }
    let mut out = Vec::with_capacity(src.len());
    for y in 0..h {
        for x in 0..w {
            let v: f64 = kernel
                .iter()
                .enumerate()
                .map(|(k, t)| t * horizontal[idx(x, y + k as i64 - radius)])
                .sum();
            out.push(v.round() as i32);
        }
    }
    out
}

/// Canny edge detector: Gaussian blur, Sobel gradients, non-maximum
/// suppression along four quantized directions, then double threshold with
/// 8-connected hysteresis from strong pixels.
///
/// Suppression follows OpenCV: along the axes a pixel must beat the neighbor
/// before it and at least match the one after it, along diagonals it must
/// beat both. An ideal step therefore keeps only its last pixel before the
/// jump.
pub fn canny_edges(img: &RasterImage, params: &EdgeParams) -> Result<GrayImage, RenderError> {
    params.validate()?;
    let gray = grayscale(img);
    let (w, h) = (gray.width as i64, gray.height as i64);
    let blurred = gaussian_blur(&gray, params.gaussian_sigma);
    let (gx, gy) = sobel_gradients(&blurred, gray.width, gray.height);
    let mag: Vec<f64> = gx.iter().zip(&gy).map(|(&x, &y)| normalized_magnitude(x, y)).collect();
    let at = |x: i64, y: i64| -> f64 {
        if x < 0 || y < 0 || x >= w || y >= h {
            0.0
        } else {
            mag[(y * w + x) as usize]
        }
    };

    let mut thin = vec![0.0; mag.len()];
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            let m = mag[i];
            if m == 0.0 {
                continue;
            }
            let (dx, dy) = quantized_direction(gx[i], gy[i]);
            let before = at(x - dx, y - dy);
            let after = at(x + dx, y + dy);
            let keep = if dx != 0 && dy != 0 {
                m > before && m > after
            } else {
                m > before && m >= after
            };
            if keep {
                thin[i] = m;
            }
        }
    }

    let low = params.canny_low as f64;
    let high = params.canny_high as f64;
    let mut out = GrayImage::new(gray.width, gray.height);
    let mut queue = VecDeque::new();
    for (i, &m) in thin.iter().enumerate() {
        if m >= high {
            out.data[i] = 255;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i as i64) % w, (i as i64) / w);
        for ny in (y - 1).max(0)..=(y + 1).min(h - 1) {
            for nx in (x - 1).max(0)..=(x + 1).min(w - 1) {
                let j = (ny * w + nx) as usize;
                if out.data[j] == 0 && thin[j] >= low {
                    out.data[j] = 255;
                    queue.push_back(j);
                }
            }
        }
    }
    Ok(out)
}

/// Unit step along the gradient, quantized to 0, 45, 90 or 135 degrees.
/// Image y grows downward.
fn quantized_direction(gx: i32, gy: i32) -> (i64, i64) {
    let mut angle = (gy as f64).atan2(gx as f64).to_degrees();
    if angle < 0.0 {
        angle += 180.0;
    }
    if !(22.5..157.5).contains(&angle) {
        (1, 0)
    } else if angle < 67.5 {
        (1, 1)
    } else if angle < 112.5 {
        (0, 1)
    } else {
        (-1, 1)
    }
}

/// Runs the configured detector.
pub fn edge_map(img: &RasterImage, params: &EdgeParams) -> Result<GrayImage, RenderError> {
    match params.algorithm {
        EdgeAlgorithm::Sobel => Ok(sobel_edges(img, params)),
        EdgeAlgorithm::Canny => canny_edges(img, params),
    }
}
