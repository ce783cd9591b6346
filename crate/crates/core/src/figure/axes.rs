use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::contour::Contour;
use super::{FigureConfig, FigureError, Rect};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: (f64, f64),
    pub end: (f64, f64),
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.end.0 - self.start.0).hypot(self.end.1 - self.start.1)
    }

    pub fn distance_to(&self, p: (f64, f64)) -> f64 {
        let (dx, dy) = (self.end.0 - self.start.0, self.end.1 - self.start.1);
        let len2 = dx * dx + dy * dy;
        let t = if len2 == 0.0 { 0.0 } else { (((p.0 - self.start.0) * dx + (p.1 - self.start.1) * dy) / len2).clamp(0.0, 1.0) };
        (p.0 - self.start.0 - t * dx).hypot(p.1 - self.start.1 - t * dy)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisFrame {
    pub x_axis: Segment,
    pub y_axis: Segment,
    pub origin: (f64, f64),
    pub bbox: Rect,
    /// Stroke thickness of each axis, px.
    pub x_thickness: f64,
    pub y_thickness: f64,
}

/// A maximal straight run of contour pixels, near-horizontal (`u = x`,
/// `v = y`) or near-vertical (`u = y`, `v = x`). The supporting line is
/// `v = center + slope * u`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Run {
    pub horizontal: bool,
    pub slope: f64,
    pub center: f64,
    pub thickness: f64,
    pub lo: i32,
    pub hi: i32,
    /// Band offsets (relative to `center`) covered by the stroke.
    pub band: (f64, f64),
}

impl Run {
    pub fn length(&self) -> f64 {
        (self.hi - self.lo) as f64 * (1.0 + self.slope * self.slope).sqrt()
    }

    pub fn v_at(&self, u: f64) -> f64 {
        self.center + self.slope * u
    }

    pub fn segment(&self) -> Segment {
        let (a, b) = ((self.lo as f64, self.v_at(self.lo as f64)), (self.hi as f64, self.v_at(self.hi as f64)));
        if self.horizontal {
            Segment { start: a, end: b }
        } else {
            Segment { start: (a.1, a.0), end: (b.1, b.0) }
        }
    }
}

const ANGLE_STEP_DEG: f64 = 0.25;
const MAX_BAND: i64 = 8;

/// Straight runs of at least `cfg.min_axis_run` px in one orientation,
/// longest first, with duplicates of the same stroke suppressed.
pub(crate) fn find_runs(pixels: &BTreeSet<(i32, i32)>, horizontal: bool, cfg: &FigureConfig) -> Vec<Run> {
    let uv: Vec<(i32, i32)> = pixels.iter().map(|&(x, y)| if horizontal { (x, y) } else { (y, x) }).collect();
    let steps = (cfg.axis_tolerance_deg / ANGLE_STEP_DEG).floor() as i32;
    let mut candidates: Vec<Run> = Vec::new();
    for k in -steps..=steps {
        let slope = (k as f64 * ANGLE_STEP_DEG).to_radians().tan();
        let mut buckets: HashMap<i64, Vec<i32>> = HashMap::new();
        for &(u, v) in &uv {
            buckets.entry((v as f64 - slope * u as f64).round() as i64).or_default().push(u);
        }
        let mut keys: Vec<i64> = buckets.keys().copied().collect();
        keys.sort_unstable();
        for us in buckets.values_mut() {
            us.sort_unstable();
            us.dedup();
        }
        for bucket in keys {
            for (lo, hi, count) in maximal_runs(&buckets[&bucket], cfg.max_run_gap) {
                let span = hi - lo;
                let length = span as f64 * (1.0 + slope * slope).sqrt();
                if length >= cfg.min_axis_run && count as f64 >= 0.75 * (span + 1) as f64 {
                    let band = band_extent(&buckets, bucket, lo, hi);
                    candidates.push(Run {
                        horizontal,
                        slope,
                        center: bucket as f64 + (band.0 + band.1) / 2.0,
                        thickness: band.1 - band.0 + 1.0,
                        lo,
                        hi,
                        band: ((band.0 - band.1) / 2.0, (band.1 - band.0) / 2.0),
                    });
                }
            }
        }
    }
    // Longest first; ties prefer lower (horizontal) or further left (vertical).
    candidates.sort_by(|a, b| {
        b.length()
            .total_cmp(&a.length())
            .then_with(|| if horizontal { b.center.total_cmp(&a.center) } else { a.center.total_cmp(&b.center) })
            .then_with(|| a.slope.abs().total_cmp(&b.slope.abs()))
            .then_with(|| a.lo.cmp(&b.lo))
    });
    let mut accepted: Vec<Run> = Vec::new();
    for c in candidates {
        let duplicate = accepted.iter().any(|a| {
            let mid = (c.lo + c.hi) as f64 / 2.0;
            let overlap = (c.hi.min(a.hi) - c.lo.max(a.lo)) as f64;
            (a.v_at(mid) - c.v_at(mid)).abs() <= (a.thickness + c.thickness) / 2.0 + 2.0 && overlap > 0.5 * (c.hi - c.lo) as f64
        });
        if !duplicate {
            accepted.push(c);
        }
    }
    accepted
}

/// `(lo, hi, count)` of maximal runs in sorted positions with holes of at
/// most `gap` pixels; neighbouring runs separated by up to three times that
/// (a curve crossing at a shallow angle) are joined while the result stays
/// dense.
fn maximal_runs(us: &[i32], gap: i32) -> Vec<(i32, i32, usize)> {
    let mut out: Vec<(i32, i32, usize)> = Vec::new();
    for (lo, hi, count) in dense_runs(us, gap) {
        if let Some(last) = out.last_mut() {
            let merged = (last.0, hi, last.2 + count);
            if lo - last.1 <= 3 * gap + 1 && merged.2 as f64 >= 0.75 * (merged.1 - merged.0 + 1) as f64 {
                *last = merged;
                continue;
            }
        }
        out.push((lo, hi, count));
    }
    out
}

fn dense_runs(us: &[i32], gap: i32) -> Vec<(i32, i32, usize)> {
    let mut out = Vec::new();
    let Some(&first) = us.first() else { return out };
    let (mut lo, mut prev, mut count) = (first, first, 1);
    for &u in &us[1..] {
        if u - prev > gap + 1 {
            out.push((lo, prev, count));
            lo = u;
            count = 0;
        }
        prev = u;
        count += 1;
    }
    out.push((lo, prev, count));
    out
}

/// Offsets of the neighbouring buckets that also cover `[lo, hi]`, giving
/// the thickness band of a stroke whose border was traced on both sides.
fn band_extent(buckets: &HashMap<i64, Vec<i32>>, bucket: i64, lo: i32, hi: i32) -> (f64, f64) {
    let covered = |b: i64| {
        buckets.get(&b).is_some_and(|us| {
            let start = us.partition_point(|&u| u < lo);
            let end = us.partition_point(|&u| u <= hi);
            (end - start) as f64 >= 0.5 * (hi - lo + 1) as f64
        })
    };
    let mut extent = (0i64, 0i64);
    for dir in [-1i64, 1] {
        let mut d = 0i64;
        let mut misses = 0;
        while misses <= MAX_BAND - 2 && d.abs() < MAX_BAND {
            d += dir;
            if covered(bucket + d) {
                if dir < 0 {
                    extent.0 = d;
                } else {
                    extent.1 = d;
                }
                misses = 0;
            } else {
                misses += 1;
            }
        }
    }
    (extent.0 as f64, extent.1 as f64)
}

pub(crate) fn contour_pixels(cs: &[Contour]) -> BTreeSet<(i32, i32)> {
    cs.iter().flat_map(|c| c.points.iter().copied()).collect()
}

/// [`detect_axes_with`] under the default configuration.
pub fn detect_axes(cs: &[Contour]) -> Result<AxisFrame, FigureError> {
    detect_axes_with(cs, &FigureConfig::default())
}

/// The longest near-horizontal run paired with the longest near-vertical
/// run crossing it; the origin is where their supporting lines meet.
pub fn detect_axes_with(cs: &[Contour], cfg: &FigureConfig) -> Result<AxisFrame, FigureError> {
    let pixels = contour_pixels(cs);
    let horizontals = find_runs(&pixels, true, cfg);
    let verticals = find_runs(&pixels, false, cfg);
    for h in &horizontals {
        for v in &verticals {
            let Some(origin) = intersect(h, v) else { continue };
            let (hs, vs) = (h.segment(), v.segment());
            if hs.distance_to(origin) <= 2.0 && vs.distance_to(origin) <= 2.0 {
                let xs = [hs.start.0, hs.end.0, vs.start.0, vs.end.0];
                let ys = [hs.start.1, hs.end.1, vs.start.1, vs.end.1];
                let min = |a: &[f64]| a.iter().copied().fold(f64::INFINITY, f64::min);
                let max = |a: &[f64]| a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                return Ok(AxisFrame {
                    x_axis: hs,
                    y_axis: vs,
                    origin,
                    bbox: Rect::from_corners(min(&xs), min(&ys), max(&xs), max(&ys)),
                    x_thickness: h.thickness,
                    y_thickness: v.thickness,
                });
            }
        }
    }
    Err(FigureError::NoAxisFound)
}

/// Meeting point of `y = ch + sh x` and `x = cv + sv y`.
fn intersect(h: &Run, v: &Run) -> Option<(f64, f64)> {
    let denom = 1.0 - h.slope * v.slope;
    if denom.abs() < 1e-9 {
        return None;
    }
    let x = (v.center + h.center * v.slope) / denom;
    Some((x, h.v_at(x)))
}
