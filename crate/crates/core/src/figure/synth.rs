//! Seeded synthetic plot pages with exact ground truth.

use image::{GrayImage, Luma};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cas::sample_curve;
use crate::expr::{parse_latex, Environment};

use super::axes::{AxisFrame, Segment};
use super::bitmap::Bitmap;
use super::font::{glyph, GLYPHS, GLYPH_SCALE};
use super::path::bresenham;
use super::{FigureError, Rect};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub width: u32,
    pub height: u32,
    /// Pixel position of world (0, 0).
    pub origin: (i32, i32),
    /// Pixels per world unit on both axes.
    pub unit: f64,
    /// First and last column of the x-axis.
    pub x_extent: (i32, i32),
    /// First and last row of the y-axis.
    pub y_extent: (i32, i32),
    /// Odd stroke widths keep the axis centred on the origin pixel.
    pub axis_thickness: u32,
    /// Curves of the form `y = f(x)`.
    pub equations: Vec<String>,
    pub stroke_thickness: u32,
    pub gridlines: bool,
    pub glyph_noise: usize,
}

#[derive(Clone, Debug)]
pub struct SyntheticFigure {
    pub image: GrayImage,
    pub axes: AxisFrame,
    pub axis_mask: Bitmap,
    pub grid_mask: Bitmap,
    /// One mask per equation.
    pub stroke_masks: Vec<Bitmap>,
    pub glyph_mask: Bitmap,
    pub glyph_count: usize,
}

impl SyntheticFigure {
    /// Every inked pixel.
    pub fn ink_mask(&self) -> Bitmap {
        let mut all = self.axis_mask.union(&self.grid_mask).union(&self.glyph_mask);
        for m in &self.stroke_masks {
            all = all.union(m);
        }
        all
    }
}

/// Margin (px) between curves and the axis ends.
const CURVE_MARGIN: i32 = 4;
/// Clearance (px) between a noise glyph and any other ink.
const GLYPH_CLEARANCE: i32 = 3;

fn brush(mask: &mut Bitmap, x: i32, y: i32, thickness: u32) {
    let t = thickness.max(1) as i32;
    let lo = -(t - 1) / 2;
    for dy in lo..lo + t {
        for dx in lo..lo + t {
            mask.set((x + dx) as i64, (y + dy) as i64, true);
        }
    }
}

pub fn generate_synthetic_figure(spec: &SyntheticSpec) -> Result<SyntheticFigure, FigureError> {
    let (w, h) = (spec.width, spec.height);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (ox, oy) = spec.origin;
    let half = (spec.axis_thickness.max(1) as i32 - 1) / 2;

    let mut axis_mask = Bitmap::new(w, h);
    for x in spec.x_extent.0..=spec.x_extent.1 {
        for t in -half..=half {
            axis_mask.set(x as i64, (oy + t) as i64, true);
        }
    }
    for y in spec.y_extent.0..=spec.y_extent.1 {
        for t in -half..=half {
            axis_mask.set((ox + t) as i64, y as i64, true);
        }
    }

    let mut grid_mask = Bitmap::new(w, h);
    if spec.gridlines {
        let (x0, x1) = spec.x_extent;
        let (y0, y1) = spec.y_extent;
        let (gx0, gx1) = (x0 + (x1 - x0) / 5, x1 - (x1 - x0) / 5);
        let (gy0, gy1) = (y0 + (y1 - y0) / 5, y1 - (y1 - y0) / 5);
        for k in -100i32..=100 {
            let gx = (ox as f64 + k as f64 * spec.unit).round() as i32;
            let gy = (oy as f64 - k as f64 * spec.unit).round() as i32;
            if k == 0 {
                continue;
            }
            if gx > x0 + 6 && gx < x1 - 6 {
                for y in gy0..=gy1 {
                    grid_mask.set(gx as i64, y as i64, true);
                }
            }
            if gy > y0 + 6 && gy < y1 - 6 {
                for x in gx0..=gx1 {
                    grid_mask.set(x as i64, gy as i64, true);
                }
            }
        }
    }

    let mut stroke_masks = Vec::new();
    let x_lo = spec.x_extent.0 + CURVE_MARGIN;
    let x_hi = spec.x_extent.1 - CURVE_MARGIN;
    let y_lo = spec.y_extent.0 + CURVE_MARGIN;
    let y_hi = spec.y_extent.1 - CURVE_MARGIN;
    for eq in &spec.equations {
        let rel = parse_latex(eq).map_err(|e| FigureError::InvalidSpec(format!("{eq}: {e}")))?;
        let world = |px: f64| (px - ox as f64) / spec.unit;
        let n = 8 * (x_hi - x_lo).max(1) as usize + 1;
        let curve = sample_curve(&rel, &Environment::new(), (world(x_lo as f64), world(x_hi as f64)), n)
            .map_err(|e| FigureError::InvalidSpec(format!("{eq}: {e}")))?;
        let mut mask = Bitmap::new(w, h);
        for seg in &curve.segments {
            let mut prev: Option<(i32, i32)> = None;
            for &(x, y) in &seg.points {
                let px = (ox as f64 + x * spec.unit).round();
                let py = oy as f64 - y * spec.unit;
                if !(py >= y_lo as f64 && py <= y_hi as f64) {
                    prev = None;
                    continue;
                }
                let p = (px as i32, py.round() as i32);
                match prev {
                    Some(q) if q != p => {
                        for (bx, by) in bresenham(q, p) {
                            brush(&mut mask, bx, by, spec.stroke_thickness);
                        }
                    }
                    Some(_) => {}
                    None => brush(&mut mask, p.0, p.1, spec.stroke_thickness),
                }
                prev = Some(p);
            }
        }
        stroke_masks.push(mask);
    }

    let mut occupied = axis_mask.union(&grid_mask);
    for m in &stroke_masks {
        occupied = occupied.union(m);
    }
    let mut glyph_mask = Bitmap::new(w, h);
    let mut glyph_count = 0;
    let (gw, gh) = (5 * GLYPH_SCALE as i32, 7 * GLYPH_SCALE as i32);
    for _ in 0..spec.glyph_noise {
        let c = GLYPHS[rng.gen_range(0..GLYPHS.len())].0;
        for _attempt in 0..500 {
            if w as i32 <= gw + 4 || h as i32 <= gh + 4 {
                break;
            }
            let gx = rng.gen_range(2..w as i32 - gw - 2);
            let gy = rng.gen_range(2..h as i32 - gh - 2);
            let clear = (gy - GLYPH_CLEARANCE..gy + gh + GLYPH_CLEARANCE)
                .all(|y| (gx - GLYPH_CLEARANCE..gx + gw + GLYPH_CLEARANCE).all(|x| !occupied.get(x as i64, y as i64)));
            if clear {
                for (dx, dy) in glyph(c).expect("font glyph") {
                    glyph_mask.set((gx + dx) as i64, (gy + dy) as i64, true);
                    occupied.set((gx + dx) as i64, (gy + dy) as i64, true);
                }
                // Reserve the whole cell so later glyphs keep their distance.
                for y in gy..gy + gh {
                    for x in gx..gx + gw {
                        occupied.set(x as i64, y as i64, true);
                    }
                }
                glyph_count += 1;
                break;
            }
        }
    }

    let mut image = GrayImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let ink = occupied_ink(&axis_mask, &grid_mask, &stroke_masks, &glyph_mask, x as i64, y as i64);
            let v: u8 = if ink { rng.gen_range(0..=100) } else { rng.gen_range(200..=255) };
            image.put_pixel(x, y, Luma([v]));
        }
    }

    let x_axis = Segment { start: (spec.x_extent.0 as f64, oy as f64), end: (spec.x_extent.1 as f64, oy as f64) };
    let y_axis = Segment { start: (ox as f64, spec.y_extent.0 as f64), end: (ox as f64, spec.y_extent.1 as f64) };
    let thickness = spec.axis_thickness.max(1) as f64;
    let axes = AxisFrame {
        x_axis,
        y_axis,
        origin: (ox as f64, oy as f64),
        bbox: Rect::from_corners(
            spec.x_extent.0.min(ox) as f64,
            spec.y_extent.0.min(oy) as f64,
            spec.x_extent.1.max(ox) as f64,
            spec.y_extent.1.max(oy) as f64,
        ),
        x_thickness: thickness,
        y_thickness: thickness,
    };
    Ok(SyntheticFigure { image, axes, axis_mask, grid_mask, stroke_masks, glyph_mask, glyph_count })
}

fn occupied_ink(axis: &Bitmap, grid: &Bitmap, strokes: &[Bitmap], glyphs: &Bitmap, x: i64, y: i64) -> bool {
    axis.get(x, y) || grid.get(x, y) || glyphs.get(x, y) || strokes.iter().any(|m| m.get(x, y))
}

fn shifted(var: &str, shift: i64) -> String {
    match shift {
        0 => var.to_string(),
        s if s > 0 => format!("({var} - {s})"),
        s => format!("({var} + {})", -s),
    }
}

fn plus(value: i64) -> String {
    match value {
        0 => String::new(),
        v if v > 0 => format!(" + {v}"),
        v => format!(" - {}", -v),
    }
}

fn random_equation(rng: &mut ChaCha8Rng, xr: (f64, f64), yr: (f64, f64)) -> String {
    let pick = |rng: &mut ChaCha8Rng, r: (f64, f64)| rng.gen_range((r.0 * 0.6).ceil() as i64..=(r.1 * 0.6).floor() as i64);
    let h = pick(rng, xr);
    let k = pick(rng, yr);
    match rng.gen_range(0..5) {
        0 => {
            let a = [0.25, 0.5, 1.0, 2.0][rng.gen_range(0..4)] * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            format!("y = {a}{}^2{}", shifted("x", h), plus(k))
        }
        1 => {
            let amp = rng.gen_range(1..=3);
            let freq = [1.0, 1.5, 2.0][rng.gen_range(0..3)];
            format!("y = {amp} \\sin({freq}x){}", plus(k))
        }
        2 => {
            let m = [0.5, 0.75, 1.0, 1.5, 2.0, 3.0][rng.gen_range(0..6)] * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            format!("y = {m}x{}", plus(k))
        }
        3 => {
            let a = [0.1, 0.2, 0.25][rng.gen_range(0..3)] * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            format!("y = {a}{}^3{}", shifted("x", h), plus(k))
        }
        _ => {
            let a = [0.5, 1.0, 2.0][rng.gen_range(0..3)] * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            format!("y = {a}|{}|{}", shifted("x", h).trim_start_matches('(').trim_end_matches(')'), plus(k))
        }
    }
}

/// Longest stretch (px) over which a curve runs inside the band of an axis
/// or gridline; such tangent stretches cannot be told apart from the line.
fn longest_band_overlap(fig: &SyntheticFigure, spec: &SyntheticSpec) -> usize {
    let (ox, oy) = spec.origin;
    let mut rows = vec![(oy, spec.axis_thickness as i32 / 2 + 3)];
    let mut cols = vec![(ox, spec.axis_thickness as i32 / 2 + 3)];
    if spec.gridlines {
        for k in -100i32..=100 {
            if k != 0 {
                rows.push(((oy as f64 - k as f64 * spec.unit).round() as i32, 3));
                cols.push(((ox as f64 + k as f64 * spec.unit).round() as i32, 3));
            }
        }
    }
    rows.retain(|&(r, _)| r >= 0 && r < spec.height as i32);
    cols.retain(|&(c, _)| c >= 0 && c < spec.width as i32);
    let mut longest = 0;
    for m in &fig.stroke_masks {
        for &(row, band) in &rows {
            let mut run = 0;
            for x in 0..spec.width as i32 {
                let hit = (row - band..=row + band).any(|y| m.get(x as i64, y as i64));
                run = if hit { run + 1 } else { 0 };
                longest = longest.max(run);
            }
        }
        for &(col, band) in &cols {
            let mut run = 0;
            for y in 0..spec.height as i32 {
                let hit = (col - band..=col + band).any(|x| m.get(x as i64, y as i64));
                run = if hit { run + 1 } else { 0 };
                longest = longest.max(run);
            }
        }
    }
    longest
}

/// Fifty seeded specs; `noisy` adds 10 to 40 label glyphs to each.
pub fn synthetic_corpus(seed: u64, noisy: bool) -> Vec<SyntheticSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(50);
    while out.len() < 50 {
        let width = rng.gen_range(480..=640u32);
        let height = rng.gen_range(400..=520u32);
        let x_extent = (rng.gen_range(20..60), width as i32 - rng.gen_range(20..60));
        let y_extent = (rng.gen_range(20..60), height as i32 - rng.gen_range(20..60));
        let origin = (
            rng.gen_range(x_extent.0 + 60..=x_extent.1 - 60),
            rng.gen_range(y_extent.0 + 60..=y_extent.1 - 60),
        );
        let unit = rng.gen_range(20..=40) as f64;
        let xr = ((x_extent.0 - origin.0) as f64 / unit, (x_extent.1 - origin.0) as f64 / unit);
        let yr = ((origin.1 - y_extent.1) as f64 / unit, (origin.1 - y_extent.0) as f64 / unit);
        let mut spec = SyntheticSpec {
            seed: rng.gen(),
            width,
            height,
            origin,
            unit,
            x_extent,
            y_extent,
            axis_thickness: [1, 3][rng.gen_range(0..2)],
            equations: vec![random_equation(&mut rng, xr, yr)],
            stroke_thickness: rng.gen_range(2..=3),
            gridlines: rng.gen_bool(0.3),
            glyph_noise: 0,
        };
        let noise = rng.gen_range(10..=40);
        let Ok(fig) = generate_synthetic_figure(&spec) else { continue };
        // Keep only figures whose curve is long and crosses the axes cleanly.
        if fig.stroke_masks[0].count_ink() < 300 || longest_band_overlap(&fig, &spec) > 12 {
            continue;
        }
        if noisy {
            spec.glyph_noise = noise;
        }
        out.push(spec);
    }
    out
}
