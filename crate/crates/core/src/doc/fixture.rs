//! The walkthrough page: a textbook-style page with the completed-square
//! parabola, its graph, and a few formulas for the other features.

use std::path::Path;

use image::Luma;
use serde_json::json;

use super::OcrWord;
use crate::figure::{generate_synthetic_figure, glyph, GrayImage, Rect, SyntheticSpec, GLYPH_SCALE};

/// Math-OCR output in its (position-free) order; `f{i}` is the id of entry `i`.
pub const WALKTHROUGH_FORMULAS: [&str; 8] = [
    "y = (x + 3)^{2} + 1",
    "y = x^2 + 6x + 10 = (x + 3)^2 + 1",
    r"\sum_{i=1}^{20} i",
    "1.55192t - 2734.55 > 400",
    r"\sqrt{(x-h)^2 + (y-k)^2} = r",
    r"\sum_{i=1}^{n} a_i",
    "x^2 - 7x + 10 = 0",
    r"\frac{1}{2",
];

const WIDTH: u32 = 800;
const HEIGHT: u32 = 1000;
const ADVANCE: f64 = 12.0;
const LINE_HEIGHT: f64 = 14.0;

struct Line {
    y: f64,
    words: &'static [&'static str],
    /// Word index range covered by a formula box.
    formula: Option<(usize, usize)>,
}

const LINES: [Line; 8] = [
    Line { y: 30.0, words: &["Example", "1.", "Sketch", "the", "graph", "of", "the", "function"], formula: None },
    Line { y: 75.0, words: &["y", "=", "x2", "+", "6x", "+", "10", "=", "(x", "+", "3)2", "+", "1"], formula: Some((0, 13)) },
    Line { y: 120.0, words: &["Completing", "the", "square", "gives", "y", "=", "(x", "3)2", "1"], formula: Some((4, 9)) },
    Line { y: 165.0, words: &["1.55192t", "-", "2734.55", ">", "400"], formula: Some((0, 5)) },
    Line { y: 210.0, words: &["x2", "-", "7x", "+", "10", "=", "0"], formula: Some((0, 7)) },
    Line { y: 255.0, words: &["∑", "i=1", "20", "i"], formula: Some((0, 4)) },
    Line { y: 300.0, words: &["√((x-h)2", "+", "(y-k)2)", "=", "r"], formula: Some((0, 5)) },
    Line { y: 345.0, words: &["see", "also", "(2)"], formula: Some((2, 3)) },
];

fn word_width(text: &str) -> f64 {
    ADVANCE * text.chars().count() as f64 - 2.0
}

fn layout() -> (Vec<OcrWord>, Vec<Rect>) {
    let mut words = Vec::new();
    let mut boxes = Vec::new();
    for line in &LINES {
        let mut x = 40.0;
        let mut placed = Vec::new();
        for text in line.words {
            let w = word_width(text);
            placed.push(Rect::new(x, line.y, w, LINE_HEIGHT));
            words.push(OcrWord { text: text.to_string(), bbox: Rect::new(x, line.y, w, LINE_HEIGHT), conf: 0.93 });
            x += w + ADVANCE;
        }
        if let Some((a, b)) = line.formula {
            let (first, last) = (placed[a], placed[b - 1]);
            boxes.push(Rect::from_corners(first.x - 4.0, line.y - 4.0, last.right() + 4.0, line.y + LINE_HEIGHT + 4.0));
        }
    }
    (words, boxes)
}

fn stamp(image: &mut GrayImage, c: char, x: i32, y: i32) {
    let ink = Luma([30u8]);
    let offsets = glyph(c).unwrap_or_else(|| {
        // characters outside the font become solid blocks of glyph size
        let (w, h) = (4 * GLYPH_SCALE as i32, 6 * GLYPH_SCALE as i32);
        (0..h).flat_map(|dy| (0..w).map(move |dx| (dx, dy + GLYPH_SCALE as i32))).collect()
    });
    for (dx, dy) in offsets {
        let (px, py) = (x + dx, y + dy);
        if px >= 0 && py >= 0 && (px as u32) < image.width() && (py as u32) < image.height() {
            image.put_pixel(px as u32, py as u32, ink);
        }
    }
}

/// The figure alone: axes 3 px thick, 40 px per unit, x from -7.5 to 1.5.
pub fn walkthrough_figure_spec() -> SyntheticSpec {
    SyntheticSpec {
        seed: 4,
        width: WIDTH,
        height: HEIGHT,
        origin: (460, 900),
        unit: 40.0,
        x_extent: (160, 520),
        y_extent: (460, 940),
        axis_thickness: 3,
        equations: vec!["y = x^2 + 6x + 10".into()],
        stroke_thickness: 2,
        gridlines: false,
        glyph_noise: 0,
    }
}

/// Writes the bundle files (`words.json`, `formulas.tex.json`,
/// `formula_boxes.json`, `annotations.json`, `page.png`) into `dir`.
pub fn write_walkthrough_bundle(dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let figure = generate_synthetic_figure(&walkthrough_figure_spec()).map_err(std::io::Error::other)?;
    let mut image = figure.image;
    let (words, boxes) = layout();
    // a short decoration rule under the heading
    for x in 40..100 {
        for y in 48..50 {
            image.put_pixel(x, y, Luma([30u8]));
        }
    }
    for w in &words {
        for (i, c) in w.text.chars().enumerate() {
            stamp(&mut image, c, (w.bbox.x + ADVANCE * i as f64) as i32, w.bbox.y as i32);
        }
    }
    let write = |name: &str, value: serde_json::Value| -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(&value)?;
        text.push('\n');
        std::fs::write(dir.join(name), text)
    };
    write("words.json", serde_json::to_value(&words)?)?;
    write("formulas.tex.json", json!(WALKTHROUGH_FORMULAS))?;
    write("formula_boxes.json", serde_json::to_value(&boxes)?)?;
    write("annotations.json", json!({ "figures": [{ "calibration": { "unit": 40.0 } }] }))?;
    image.save(dir.join("page.png")).map_err(std::io::Error::other)
}
