use serde::{Deserialize, Serialize};

use super::bitmap::Bitmap;

/// Clockwise in image coordinates (y down), starting east.
pub(crate) const DIRS: [(i32, i32); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

/// Inclusive pixel bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelBox {
    pub x0: i32,
    pub y0: i32,
    pub x1: i32,
    pub y1: i32,
}

impl PixelBox {
    pub fn width(&self) -> i32 {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> i32 {
        self.y1 - self.y0 + 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub points: Vec<(i32, i32)>,
    pub closed: bool,
    pub arc_length: f64,
    pub bbox: PixelBox,
    /// Borders an enclosed background region rather than the outside.
    #[serde(default)]
    pub hole: bool,
    /// Index of the ink component (in raster order of first pixel).
    #[serde(default)]
    pub component: usize,
}

impl Contour {
    /// Builds a contour from an 8-connected, non-empty point sequence.
    pub fn new(points: Vec<(i32, i32)>, closed: bool) -> Contour {
        assert!(!points.is_empty(), "contour needs a point");
        let step = |a: (i32, i32), b: (i32, i32)| (((a.0 - b.0).pow(2) + (a.1 - b.1).pow(2)) as f64).sqrt();
        let mut arc_length: f64 = points.windows(2).map(|w| step(w[0], w[1])).sum();
        if closed && points.len() > 1 {
            arc_length += step(points[points.len() - 1], points[0]);
        }
        let mut bbox = PixelBox { x0: i32::MAX, y0: i32::MAX, x1: i32::MIN, y1: i32::MIN };
        for &(x, y) in &points {
            bbox.x0 = bbox.x0.min(x);
            bbox.y0 = bbox.y0.min(y);
            bbox.x1 = bbox.x1.max(x);
            bbox.y1 = bbox.y1.max(y);
        }
        Contour { points, closed, arc_length, bbox, hole: false, component: 0 }
    }
}

/// Borders of 8-connected ink components: one outer border per component
/// plus one border per enclosed (4-connected) background region, ordered by
/// starting pixel in raster order.
pub fn extract_contours(b: &Bitmap) -> Vec<Contour> {
    let (w, h) = (b.width() as i64, b.height() as i64);
    let mut seen = vec![false; (w * h) as usize];
    let mut component_of = vec![usize::MAX; (w * h) as usize];
    let mut components = 0;
    let mut out: Vec<((i32, i32), bool, Contour)> = Vec::new();
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            if seen[i] {
                continue;
            }
            let ink = b.get(x, y);
            seen[i] = true;
            stack.push((x, y));
            let mut enclosed = true;
            while let Some((px, py)) = stack.pop() {
                if ink {
                    component_of[(py * w + px) as usize] = components;
                }
                if !ink && (px == 0 || py == 0 || px == w - 1 || py == h - 1) {
                    enclosed = false;
                }
                let neighbours: &[(i32, i32)] = if ink { &DIRS } else { &[(1, 0), (0, 1), (-1, 0), (0, -1)] };
                for &(dx, dy) in neighbours {
                    let (nx, ny) = (px + dx as i64, py + dy as i64);
                    if nx < 0 || ny < 0 || nx >= w || ny >= h || b.get(nx, ny) != ink {
                        continue;
                    }
                    let j = (ny * w + nx) as usize;
                    if !seen[j] {
                        seen[j] = true;
                        stack.push((nx, ny));
                    }
                }
            }
            let start = (x as i32, y as i32);
            if ink {
                let mut c = trace(b, start, 4);
                c.component = components;
                components += 1;
                out.push((start, false, c));
            } else if enclosed {
                // The pixel above a hole's first raster pixel is ink.
                let above = (x as i32, y as i32 - 1);
                let mut c = trace(b, above, 2);
                c.hole = true;
                c.component = component_of[((y - 1) * w + x) as usize];
                out.push((above, true, c));
            }
        }
    }
    out.sort_by_key(|(start, hole, _)| (start.1, start.0, *hole));
    out.into_iter().map(|(_, _, c)| c).collect()
}

/// Moore-neighbour tracing from `start`, whose neighbour in direction
/// `back` is background; that background region stays on the same side.
fn trace(b: &Bitmap, start: (i32, i32), back: usize) -> Contour {
    let ink = |p: (i32, i32)| b.get(p.0 as i64, p.1 as i64);
    let step = |p: (i32, i32), d: usize| (p.0 + DIRS[d].0, p.1 + DIRS[d].1);
    // Returns the next border pixel and the direction (from it) of the last
    // background pixel examined.
    let advance = |p: (i32, i32), back: usize| -> Option<((i32, i32), usize)> {
        for i in 1..=8 {
            let d = (back + i) % 8;
            let q = step(p, d);
            if ink(q) {
                let prev = step(p, (back + i - 1) % 8);
                let back_dir = DIRS.iter().position(|&(dx, dy)| (q.0 + dx, q.1 + dy) == prev).expect("adjacent");
                return Some((q, back_dir));
            }
        }
        None
    };
    let Some((first, first_back)) = advance(start, back) else {
        return Contour::new(vec![start], true);
    };
    let mut points = vec![start];
    let (mut p, mut back) = (first, first_back);
    let limit = 4 * (b.width() as usize * b.height() as usize) + 16;
    for _ in 0..limit {
        let (q, nb) = advance(p, back).expect("border pixel has an ink neighbour");
        if p == start && q == first {
            break;
        }
        points.push(p);
        p = q;
        back = nb;
    }
    Contour::new(points, true)
}

/// Keeps contours whose arc length is at least `min_len`.
pub fn filter_text_contours(cs: &[Contour], min_len: f64) -> Vec<Contour> {
    cs.iter().filter(|c| c.arc_length >= min_len).cloned().collect()
}

/// Drops whole components (outer border and holes) whose outer border is
/// shorter than `min_len`.
pub fn filter_text_components(cs: &[Contour], min_len: f64) -> Vec<Contour> {
    let kept: std::collections::BTreeSet<usize> =
        cs.iter().filter(|c| !c.hole && c.arc_length >= min_len).map(|c| c.component).collect();
    cs.iter().filter(|c| kept.contains(&c.component)).cloned().collect()
}
