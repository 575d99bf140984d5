//! Scene rendering: composition, edge detection, vector tracing and export.

pub mod edges;
pub mod raster;
pub mod vector;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use edges::{canny_edges, edge_map, sobel_edges, EdgeAlgorithm, EdgeParams};
pub use raster::{compose, Composition, GrayImage, RasterImage};
pub use vector::{tactile_vectorize, VectorDoc, VectorElement};

use crate::genai::GenBackend;
use crate::scene::Scene;
use crate::store::ImageStore;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("canny low threshold {low} must be below high threshold {high}")]
    InvalidThresholds { low: u8, high: u8 },
    #[error("gaussian sigma must be a finite non-negative number, got {0}")]
    InvalidSigma(f64),
    #[error("{0} output is not supported for this input")]
    UnsupportedFormat(ExportFormat),
    #[error("image encoding failed: {0}")]
    Encode(String),
    #[error("image decoding failed: {0}")]
    Decode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExportFormat {
    Png,
    Svg,
}

impl ExportFormat {
    pub fn media_type(self) -> &'static str {
        match self {
            ExportFormat::Png => "image/png",
            ExportFormat::Svg => "image/svg+xml",
        }
    }
}

impl std::fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ExportFormat::Png => "PNG",
            ExportFormat::Svg => "SVG",
        })
    }
}

impl std::str::FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "png" => Ok(ExportFormat::Png),
            "svg" => Ok(ExportFormat::Svg),
            other => Err(format!("unknown format `{other}` (expected png or svg)")),
        }
    }
}

pub enum Renderable<'a> {
    Raster(&'a RasterImage),
    Vector(&'a VectorDoc),
}

/// Encodes a raster or vector document. SVG is only available for vectors;
/// vectors exported as PNG are rasterized at document size.
pub fn export(item: Renderable<'_>, format: ExportFormat) -> Result<Vec<u8>, RenderError> {
    match (item, format) {
        (Renderable::Raster(img), ExportFormat::Png) => img.to_png(),
        (Renderable::Raster(_), ExportFormat::Svg) => Err(RenderError::UnsupportedFormat(format)),
        (Renderable::Vector(doc), ExportFormat::Svg) => Ok(doc.to_svg().into_bytes()),
        (Renderable::Vector(doc), ExportFormat::Png) => doc.rasterize().to_png(),
    }
}

/// Composes the scene and traces its edges into a vector document.
pub fn tactile_document(scene: &Scene, store: &dyn ImageStore, params: &EdgeParams) -> Result<(VectorDoc, Vec<String>), RenderError> {
    let composition = compose(scene, store);
    let edges = edge_map(&composition.image, params)?;
    Ok((tactile_vectorize(&edges), composition.warnings))
}

/// Hue in degrees derived from an instruction's hash.
pub fn instruction_hue(instruction: &str) -> u16 {
    let digest = Sha256::digest(instruction.as_bytes());
    u16::from_be_bytes([digest[0], digest[1]]) % 360
}

/// Re-renders the composed scene according to a spoken instruction, falling
/// back to the plain composition when the backend fails.
pub fn background_render(
    backend: &dyn GenBackend,
    scene: &Scene,
    store: &dyn ImageStore,
    instruction: &str,
) -> Result<Composition, RenderError> {
    let mut composition = compose(scene, store);
    let snapshot = composition.image.to_png()?;
    match backend
        .render_background(&snapshot, instruction)
        .map_err(|e| e.to_string())
        .and_then(|png| RasterImage::from_png(&png).map_err(|e| e.to_string()))
    {
        Ok(image) => composition.image = image,
        Err(e) => composition
            .warnings
            .push(format!("background render failed, returning plain composition: {e}")),
    }
    Ok(composition)
}

/// Instruction used for color renders when none is given.
pub const DEFAULT_INSTRUCTION: &str = "a plain white background";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RenderKind {
    /// The composed canvas.
    Snapshot,
    /// The composed canvas re-rendered by the backend with a new background.
    Color,
    /// Edge-traced vector output for tactile printing.
    Tactile,
}

impl RenderKind {
    pub fn default_format(self) -> ExportFormat {
        match self {
            RenderKind::Snapshot | RenderKind::Color => ExportFormat::Png,
            RenderKind::Tactile => ExportFormat::Svg,
        }
    }
}

impl std::str::FromStr for RenderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "snapshot" => Ok(RenderKind::Snapshot),
            "color" | "colour" => Ok(RenderKind::Color),
            "tactile" => Ok(RenderKind::Tactile),
            other => Err(format!("unknown render kind `{other}` (expected snapshot, color or tactile)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderRequest {
    pub kind: RenderKind,
    pub format: Option<ExportFormat>,
    pub edges: EdgeParams,
    pub instruction: String,
}

impl RenderRequest {
    pub fn new(kind: RenderKind) -> Self {
        RenderRequest {
            kind,
            format: None,
            edges: EdgeParams::default(),
            instruction: DEFAULT_INSTRUCTION.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderOutput {
    pub bytes: Vec<u8>,
    pub format: ExportFormat,
    pub warnings: Vec<String>,
}

/// Produces one render of the scene in the requested format.
pub fn render(
    scene: &Scene,
    store: &dyn ImageStore,
    backend: &dyn GenBackend,
    req: &RenderRequest,
) -> Result<RenderOutput, RenderError> {
    req.edges.validate()?;
    let format = req.format.unwrap_or(req.kind.default_format());
    let (bytes, warnings) = match req.kind {
        RenderKind::Snapshot => {
            let c = compose(scene, store);
            (export(Renderable::Raster(&c.image), format)?, c.warnings)
        }
        RenderKind::Color => {
            let c = background_render(backend, scene, store, &req.instruction)?;
            (export(Renderable::Raster(&c.image), format)?, c.warnings)
        }
        RenderKind::Tactile => {
            let (doc, warnings) = tactile_document(scene, store, &req.edges)?;
            (export(Renderable::Vector(&doc), format)?, warnings)
        }
    };
    Ok(RenderOutput {
        bytes,
        format,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_only_for_vectors() {
        let img = RasterImage::white(3, 3);
        assert_eq!(
            export(Renderable::Raster(&img), ExportFormat::Svg),
            Err(RenderError::UnsupportedFormat(ExportFormat::Svg))
        );
        let doc = VectorDoc::new(4, 4);
        let png = export(Renderable::Vector(&doc), ExportFormat::Png).unwrap();
        let back = RasterImage::from_png(&png).unwrap();
        assert_eq!((back.width(), back.height()), (4, 4));
    }

    #[test]
    fn empty_tactile_render_is_valid_svg() {
        let scene = Scene::new(crate::scene::CanvasConfig::default());
        let store = crate::store::MemoryStore::new();
        let backend = crate::genai::MockBackend::new(0);
        let out = render(&scene, &store, &backend, &RenderRequest::new(RenderKind::Tactile)).unwrap();
        assert_eq!(out.format, ExportFormat::Svg);
        let svg = String::from_utf8(out.bytes).unwrap();
        assert!(svg.contains("viewBox=\"0 0 600 600\""));
        assert!(!svg.contains("<polyline"));

        let mut bad = RenderRequest::new(RenderKind::Tactile);
        bad.edges.canny_low = 120;
        bad.edges.canny_high = 80;
        assert_eq!(
            render(&scene, &store, &backend, &bad),
            Err(RenderError::InvalidThresholds { low: 120, high: 80 })
        );
        let snap = render(&scene, &store, &backend, &RenderRequest::new(RenderKind::Snapshot)).unwrap();
        let img = RasterImage::from_png(&snap.bytes).unwrap();
        assert_eq!((img.width(), img.height()), (600, 600));
    }

    #[test]
    fn hues_differ_between_instructions() {
        let a = instruction_hue("a sunny day with blue skies");
        let b = instruction_hue("a night scene with a moonlit backdrop");
        assert_ne!(a, b);
        assert_eq!(a, instruction_hue("a sunny day with blue skies"));
    }
}
