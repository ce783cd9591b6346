//! Figure extraction from page images: binarization, contour tracing,
//! axis detection, graph paths, and the pixel/world mapping.

mod axes;
mod bitmap;
mod contour;
mod coords;
mod font;
mod path;
mod synth;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use axes::{detect_axes, detect_axes_with, AxisFrame, Segment};
pub use bitmap::{binarize, load_grayscale, Bitmap};
pub use contour::{extract_contours, filter_text_components, filter_text_contours, Contour, PixelBox};
pub use coords::{make_mapping, Calibration, CoordMap};
pub use font::{glyph, GLYPHS, GLYPH_SCALE};
pub use path::{detect_figures, extract_graph_path, extract_graph_path_with, DetectedFigure, GraphPaths};
pub use synth::{generate_synthetic_figure, synthetic_corpus, SyntheticFigure, SyntheticSpec};

pub use image::GrayImage;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum FigureError {
    #[error("no axis run in one orientation")]
    NoAxisFound,
    #[error("no graph path inside the figure")]
    NoPath,
    #[error("calibration points coincide")]
    DegenerateCalibration,
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("image: {0}")]
    Image(String),
}

/// Tunable thresholds of the extraction pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FigureConfig {
    pub binarize_threshold: u8,
    /// Contours shorter than this (arc length, px) are treated as text.
    pub min_contour_len: f64,
    pub axis_tolerance_deg: f64,
    pub min_axis_run: f64,
    /// Largest hole (px) tolerated inside a straight run.
    pub max_run_gap: i32,
    /// Path pieces closer than this (px) are joined.
    pub merge_gap: i32,
}

impl Default for FigureConfig {
    fn default() -> Self {
        FigureConfig {
            binarize_threshold: 128,
            min_contour_len: 80.0,
            axis_tolerance_deg: 3.0,
            min_axis_run: 40.0,
            max_run_gap: 10,
            merge_gap: 7,
        }
    }
}

/// Axis-aligned rectangle in pixels; serialized as `[x, y, w, h]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Rect { x, y, w, h }
    }

    pub fn from_corners(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x: x0.min(x1), y: y0.min(y1), w: (x1 - x0).abs(), h: (y1 - y0).abs() }
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x && x <= self.right() && y >= self.y && y <= self.bottom()
    }

    pub fn expand(&self, margin: f64) -> Rect {
        Rect { x: self.x - margin, y: self.y - margin, w: self.w + 2.0 * margin, h: self.h + 2.0 * margin }
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        (x1 >= x0 && y1 >= y0).then(|| Rect::from_corners(x0, y0, x1, y1))
    }

    /// Intersection over union.
    pub fn iou(&self, other: &Rect) -> f64 {
        let inter = self.intersection(other).map_or(0.0, |r| r.area());
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }
}

impl From<[f64; 4]> for Rect {
    fn from(v: [f64; 4]) -> Self {
        Rect::new(v[0], v[1], v[2], v[3])
    }
}

impl From<Rect> for [f64; 4] {
    fn from(r: Rect) -> Self {
        [r.x, r.y, r.w, r.h]
    }
}
