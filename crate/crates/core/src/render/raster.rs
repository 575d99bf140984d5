//! RGBA and single-channel rasters, PNG coding, and scene composition.

use std::io::Cursor;

use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder, ImageFormat};

use super::RenderError;
use crate::scene::Scene;
use crate::store::ImageStore;

/// Row-major 8-bit RGBA pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl RasterImage {
    pub fn filled(width: u32, height: u32, rgba: [u8; 4]) -> Self {
        let pixels = rgba.repeat(width as usize * height as usize);
        RasterImage { width, height, pixels }
    }

    pub fn white(width: u32, height: u32) -> Self {
        Self::filled(width, height, [255, 255, 255, 255])
    }

    pub fn from_rgba(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, RenderError> {
        if pixels.len() != width as usize * height as usize * 4 {
            return Err(RenderError::Decode(format!(
                "expected {} bytes for {width}x{height} RGBA, got {}",
                width as usize * height as usize * 4,
                pixels.len()
            )));
        }
        Ok(RasterImage { width, height, pixels })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    fn index(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 4
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 4] {
        let i = self.index(x, y);
        self.pixels[i..i + 4].try_into().expect("four channels")
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, rgba: [u8; 4]) {
        let i = self.index(x, y);
        self.pixels[i..i + 4].copy_from_slice(&rgba);
    }

    /// Nearest-neighbor resample to `width` x `height`.
    pub fn scaled(&self, width: u32, height: u32) -> RasterImage {
        let mut out = RasterImage::filled(width, height, [0, 0, 0, 0]);
        if self.width == 0 || self.height == 0 {
            return out;
        }
        for y in 0..height {
            let sy = (y as u64 * self.height as u64 / height as u64) as u32;
            for x in 0..width {
                let sx = (x as u64 * self.width as u64 / width as u64) as u32;
                out.set_pixel(x, y, self.pixel(sx, sy));
            }
        }
        out
    }

    /// Alpha-composites `src` with its top-left corner at (`left`, `top`),
    /// clipping to this image.
    pub fn draw_over(&mut self, src: &RasterImage, left: i64, top: i64) {
        for sy in 0..src.height {
            let y = top + sy as i64;
            if y < 0 || y >= self.height as i64 {
                continue;
            }
            for sx in 0..src.width {
                let x = left + sx as i64;
                if x < 0 || x >= self.width as i64 {
                    continue;
                }
                let s = src.pixel(sx, sy);
                let d = self.pixel(x as u32, y as u32);
                self.set_pixel(x as u32, y as u32, blend(s, d));
            }
        }
    }

    pub fn to_png(&self) -> Result<Vec<u8>, RenderError> {
        let mut out = Vec::new();
        PngEncoder::new(&mut out)
            .write_image(&self.pixels, self.width, self.height, ExtendedColorType::Rgba8)
            .map_err(|e| RenderError::Encode(e.to_string()))?;
        Ok(out)
    }

    pub fn from_png(bytes: &[u8]) -> Result<RasterImage, RenderError> {
        let decoded = image::load(Cursor::new(bytes), ImageFormat::Png)
            .map_err(|e| RenderError::Decode(e.to_string()))?
            .to_rgba8();
        let (width, height) = decoded.dimensions();
        Ok(RasterImage {
            width,
            height,
            pixels: decoded.into_raw(),
        })
    }
}

/// Source-over blend of straight-alpha pixels.
fn blend(src: [u8; 4], dst: [u8; 4]) -> [u8; 4] {
    let sa = src[3] as u32;
    if sa == 255 {
        return src;
    }
    if sa == 0 {
        return dst;
    }
    let inv = 255 - sa;
    let mut out = [0u8; 4];
    for c in 0..3 {
        out[c] = ((src[c] as u32 * sa + dst[c] as u32 * inv + 127) / 255) as u8;
    }
    out[3] = (sa + (dst[3] as u32 * inv + 127) / 255) as u8;
    out
}

/// Single-channel 8-bit image, used for grayscale and edge maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32) -> Self {
        GrayImage {
            width,
            height,
            data: vec![0; width as usize * height as usize],
        }
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: u8) {
        self.data[y as usize * self.width as usize + x as usize] = v;
    }

    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    /// Edge pixels in black on white, for printing.
    pub fn to_raster_inverted(&self) -> RasterImage {
        let mut pixels = Vec::with_capacity(self.data.len() * 4);
        for &v in &self.data {
            let c = 255 - v;
            pixels.extend_from_slice(&[c, c, c, 255]);
        }
        RasterImage {
            width: self.width,
            height: self.height,
            pixels,
        }
    }
}

/// A composed canvas and the objects that had to fall back to a placeholder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composition {
    pub image: RasterImage,
    pub warnings: Vec<String>,
}

/// Gray and white 10 px checkerboard for objects whose image is missing.
pub fn placeholder(width: u32, height: u32) -> RasterImage {
    let mut img = RasterImage::white(width, height);
    for y in 0..height {
        for x in 0..width {
            if ((x / 10) + (y / 10)) % 2 == 0 {
                img.set_pixel(x, y, [192, 192, 192, 255]);
            }
        }
    }
    img
}

/// Draws every object onto a white canvas in ascending z order, each image
/// scaled to the object's size with nearest-neighbor sampling.
pub fn compose(scene: &Scene, store: &dyn ImageStore) -> Composition {
    let mut image = RasterImage::white(scene.config.width as u32, scene.config.height as u32);
    let mut warnings = Vec::new();
    for obj in scene.objects() {
        let (w, h) = (obj.size.width as u32, obj.size.height as u32);
        let source = match &obj.image_ref {
            None => {
                warnings.push(format!("{} has no image yet", obj.name));
                None
            }
            Some(key) => match store.get(key) {
                Ok(Some(bytes)) => match RasterImage::from_png(&bytes) {
                    Ok(img) => Some(img),
                    Err(e) => {
                        warnings.push(format!("{}: unreadable image {key}: {e}", obj.name));
                        None
                    }
                },
                Ok(None) => {
                    warnings.push(format!("{}: image {key} not found", obj.name));
                    None
                }
                Err(e) => {
                    warnings.push(format!("{}: image {key}: {e}", obj.name));
                    None
                }
            },
        };
        let sprite = match source {
            Some(img) => img.scaled(w, h),
            None => placeholder(w, h),
        };
        let tl = obj.top_left();
        image.draw_over(&sprite, tl.x, tl.y);
    }
    Composition { image, warnings }
}

/// Converts an RGB hue in degrees to a saturated color.
pub fn hue_color(hue: u16) -> [u8; 3] {
    let h = (hue % 360) as u32;
    let sector = h / 60;
    let rising = ((h % 60) * 255 / 60) as u8;
    let falling = 255 - rising;
    match sector {
        0 => [255, rising, 0],
        1 => [falling, 255, 0],
        2 => [0, 255, rising],
        3 => [0, falling, 255],
        4 => [rising, 0, 255],
        _ => [255, 0, falling],
    }
}

/// Mixes a quarter of the hue color into every pixel.
pub fn tint(img: &RasterImage, hue: u16) -> RasterImage {
    let color = hue_color(hue);
    let mut out = img.clone();
    for px in out.pixels.chunks_exact_mut(4) {
        for c in 0..3 {
            px[c] = ((px[c] as u32 * 3 + color[c] as u32 + 2) / 4) as u8;
        }
    }
    out
}
