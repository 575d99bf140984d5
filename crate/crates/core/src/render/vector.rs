//! Vector documents for tactile output: traced edge polylines and image
//! placements, with SVG serialization and a 1 px rasterizer.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::raster::{GrayImage, RasterImage};

/// Traced runs shorter than this many pixels are dropped as noise.
pub const MIN_POLYLINE_POINTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum VectorElement {
    Image {
        image_ref: String,
        x: i64,
        y: i64,
        width: i64,
        height: i64,
    },
    Polyline {
        points: Vec<(i64, i64)>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorDoc {
    pub width: i64,
    pub height: i64,
    pub elements: Vec<VectorElement>,
}

impl VectorDoc {
    pub fn new(width: i64, height: i64) -> Self {
        VectorDoc {
            width,
            height,
            elements: Vec::new(),
        }
    }

    pub fn polylines(&self) -> impl Iterator<Item = &[(i64, i64)]> {
        self.elements.iter().filter_map(|e| match e {
            VectorElement::Polyline { points } => Some(points.as_slice()),
            VectorElement::Image { .. } => None,
        })
    }

    pub fn to_svg(&self) -> String {
        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = write!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" \
             version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
            w = self.width,
            h = self.height
        );
        for element in &self.elements {
            out.push('\n');
            match element {
                VectorElement::Polyline { points } => {
                    let coords: Vec<String> = points.iter().map(|(x, y)| format!("{x},{y}")).collect();
                    let _ = write!(
                        out,
                        "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"{}\"/>",
                        coords.join(" ")
                    );
                }
                VectorElement::Image {
                    image_ref,
                    x,
                    y,
                    width,
                    height,
                } => {
                    let _ = write!(
                        out,
                        "<image xlink:href=\"images/{}.png\" x=\"{x}\" y=\"{y}\" width=\"{width}\" height=\"{height}\"/>",
                        xml_escape(image_ref)
                    );
                }
            }
        }
        out.push_str("\n</svg>\n");
        out
    }

    /// Draws polylines as 1 px black strokes and image placements as box
    /// outlines on a white canvas of the document size.
    pub fn rasterize(&self) -> RasterImage {
        let mut img = RasterImage::white(self.width.max(0) as u32, self.height.max(0) as u32);
        let black = [0, 0, 0, 255];
        for element in &self.elements {
            match element {
                VectorElement::Polyline { points } => {
                    if let [only] = points.as_slice() {
                        plot(&mut img, only.0, only.1, black);
                    }
                    for pair in points.windows(2) {
                        draw_line(&mut img, pair[0], pair[1], black);
                    }
                }
                VectorElement::Image {
                    x, y, width, height, ..
                } => {
                    let (x1, y1) = (x + width - 1, y + height - 1);
                    for (a, b) in [((*x, *y), (x1, *y)), ((x1, *y), (x1, y1)), ((x1, y1), (*x, y1)), ((*x, y1), (*x, *y))] {
                        draw_line(&mut img, a, b, black);
                    }
                }
            }
        }
        img
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn plot(img: &mut RasterImage, x: i64, y: i64, rgba: [u8; 4]) {
    if x >= 0 && y >= 0 && x < img.width() as i64 && y < img.height() as i64 {
        img.set_pixel(x as u32, y as u32, rgba);
    }
}

/// Bresenham line including both endpoints.
fn draw_line(img: &mut RasterImage, from: (i64, i64), to: (i64, i64), rgba: [u8; 4]) {
    let (mut x, mut y) = from;
    let dx = (to.0 - x).abs();
    let dy = -(to.1 - y).abs();
    let sx = if x < to.0 { 1 } else { -1 };
    let sy = if y < to.1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        plot(img, x, y, rgba);
        if (x, y) == to {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

// orthogonal steps first so straight runs stay straight
const STEPS: [(i64, i64); 8] = [(1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (-1, -1), (1, -1)];

/// Traces 8-connected runs of nonzero pixels into polylines.
///
/// Walks start at run endpoints (pixels with a single edge neighbor) and then
/// at any pixel still unvisited, so closed loops are traced too. Each walk
/// greedily follows an unvisited neighbor; at a branch the untaken arm is
/// traced later as its own polyline. Runs with fewer than
/// [`MIN_POLYLINE_POINTS`] points are dropped.
pub fn tactile_vectorize(edges: &GrayImage) -> VectorDoc {
    let (w, h) = (edges.width as i64, edges.height as i64);
    let is_edge = |x: i64, y: i64| x >= 0 && y >= 0 && x < w && y < h && edges.get(x as u32, y as u32) != 0;
    let degree = |x: i64, y: i64| STEPS.iter().filter(|(dx, dy)| is_edge(x + dx, y + dy)).count();

    let mut doc = VectorDoc::new(w, h);
    let mut visited: HashSet<(i64, i64)> = HashSet::new();
    let pixels: Vec<(i64, i64)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| is_edge(x, y))
        .collect();
    let endpoints: Vec<(i64, i64)> = pixels.iter().copied().filter(|&(x, y)| degree(x, y) <= 1).collect();

    for start in endpoints.into_iter().chain(pixels.iter().copied()) {
        if visited.contains(&start) {
            continue;
        }
        let mut points = vec![start];
        visited.insert(start);
        let mut at = start;
        while let Some(next) = STEPS
            .iter()
            .map(|(dx, dy)| (at.0 + dx, at.1 + dy))
            .find(|&(x, y)| is_edge(x, y) && !visited.contains(&(x, y)))
        {
            visited.insert(next);
            points.push(next);
            at = next;
        }
        if points.len() >= MIN_POLYLINE_POINTS {
            doc.elements.push(VectorElement::Polyline { points });
        }
    }
    doc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edges_from(points: &[(u32, u32)], w: u32, h: u32) -> GrayImage {
        let mut g = GrayImage::new(w, h);
        for &(x, y) in points {
            g.set(x, y, 255);
        }
        g
    }

    #[test]
    fn column_becomes_one_polyline() {
        let pts: Vec<(u32, u32)> = (0..100).map(|y| (5, y)).collect();
        let doc = tactile_vectorize(&edges_from(&pts, 10, 100));
        let lines: Vec<_> = doc.polylines().collect();
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].len(), 100);
        assert_eq!(lines[0][0], (5, 0));
        assert_eq!(lines[0][99], (5, 99));
    }

    #[test]
    fn empty_map_gives_empty_doc() {
        let doc = tactile_vectorize(&GrayImage::new(20, 20));
        assert!(doc.elements.is_empty());
        let svg = doc.to_svg();
        assert!(svg.contains("<svg "));
        assert!(!svg.contains("<polyline"));
    }

    #[test]
    fn specks_are_dropped() {
        let doc = tactile_vectorize(&edges_from(&[(1, 1), (2, 1), (3, 1), (4, 1)], 10, 10));
        assert!(doc.elements.is_empty());
        let doc = tactile_vectorize(&edges_from(&[(1, 1), (2, 1), (3, 1), (4, 1), (5, 1)], 10, 10));
        assert_eq!(doc.elements.len(), 1);
    }

    #[test]
    fn closed_loop_is_traced() {
        let mut pts = Vec::new();
        for i in 2..8 {
            pts.extend([(i, 2), (i, 7), (2, i), (7, i)]);
        }
        let edges = edges_from(&pts, 10, 10);
        let doc = tactile_vectorize(&edges);
        let covered: usize = doc.polylines().map(<[_]>::len).sum();
        assert_eq!(covered, edges.count_nonzero());
    }

    #[test]
    fn rasterize_single_path() {
        let mut doc = VectorDoc::new(10, 10);
        doc.elements.push(VectorElement::Polyline {
            points: vec![(1, 1), (8, 1)],
        });
        let img = doc.rasterize();
        for x in 0..10 {
            assert_eq!(img.pixel(x, 1) == [0, 0, 0, 255], (1..=8).contains(&x));
        }
        assert_eq!(img.pixel(1, 2), [255; 4]);
    }

    #[test]
    fn svg_uses_integer_coordinates() {
        let mut doc = VectorDoc::new(30, 20);
        doc.elements.push(VectorElement::Polyline {
            points: vec![(0, 0), (1, 1), (2, 2)],
        });
        doc.elements.push(VectorElement::Image {
            image_ref: "abc".into(),
            x: 1,
            y: 2,
            width: 3,
            height: 4,
        });
        let svg = doc.to_svg();
        assert!(svg.contains("points=\"0,0 1,1 2,2\""));
        assert!(svg.contains("xlink:href=\"images/abc.png\" x=\"1\" y=\"2\" width=\"3\" height=\"4\""));
        assert!(svg.contains("viewBox=\"0 0 30 20\""));
    }
}
