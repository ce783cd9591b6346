use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::axes::{contour_pixels, detect_axes_with, find_runs, AxisFrame, Segment};
use super::bitmap::Bitmap;
use super::contour::{extract_contours, Contour};
use super::{FigureConfig, FigureError};

const MAX_FIGURES: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphPaths {
    pub primary: Contour,
    /// Other paths in the figure, longest first.
    pub secondary: Vec<Contour>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectedFigure {
    pub frame: AxisFrame,
    pub paths: Option<GraphPaths>,
}

/// [`extract_graph_path_with`] under the default configuration.
pub fn extract_graph_path(cs: &[Contour], frame: &AxisFrame) -> Result<GraphPaths, FigureError> {
    extract_graph_path_with(cs, frame, &FigureConfig::default())
}

/// Removes the axes (and gridlines parallel to them) from the contour
/// pixels, joins the remaining pieces that lie within `cfg.merge_gap` of each
/// other, and returns the resulting paths inside the figure, longest first.
pub fn extract_graph_path_with(cs: &[Contour], frame: &AxisFrame, cfg: &FigureConfig) -> Result<GraphPaths, FigureError> {
    let pixels = contour_pixels(cs);
    let (Some(mx), Some(my)) = (pixels.iter().map(|p| p.0).max(), pixels.iter().map(|p| p.1).max()) else {
        return Err(FigureError::NoPath);
    };
    let mut canvas = Bitmap::new(mx.max(0) as u32 + 3, my.max(0) as u32 + 3);
    for &(x, y) in &pixels {
        canvas.set(x as i64, y as i64, true);
    }
    let mut erased = Bitmap::new(canvas.width(), canvas.height());
    erase_band(&mut canvas, &mut erased, &frame.x_axis, frame.x_thickness, true);
    erase_band(&mut canvas, &mut erased, &frame.y_axis, frame.y_thickness, false);
    // Gridlines: straight runs at least half as long as the parallel axis.
    for horizontal in [true, false] {
        let axis_len = if horizontal { frame.x_axis.length() } else { frame.y_axis.length() };
        for run in find_runs(&pixels, horizontal, cfg).into_iter().filter(|r| r.length() >= 0.5 * axis_len) {
            erase_band(&mut canvas, &mut erased, &run.segment(), run.thickness, horizontal);
        }
    }

    let region = frame.bbox.expand(3.0);
    let loops: Vec<Vec<(i32, i32)>> = extract_contours(&canvas)
        .into_iter()
        .filter(|c| !c.hole)
        .filter(|c| {
            let (w, h) = (c.bbox.width(), c.bbox.height());
            !(w.min(h) <= 3 && w.max(h) >= 10)
        })
        .filter(|c| {
            let inside = c.points.iter().filter(|p| region.contains(p.0 as f64, p.1 as f64)).count();
            2 * inside >= c.points.len()
        })
        .map(|c| c.points)
        .collect();

    let edges = close_pairs(&loops, &erased, cfg.merge_gap);
    let mut parent: Vec<usize> = (0..loops.len()).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    let mut adjacency: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); loops.len()];
    let mut ordered: Vec<(i64, (usize, usize), (usize, usize))> =
        edges.into_iter().map(|((i, j), (d, pi, pj))| (d, (i, j), (pi, pj))).collect();
    ordered.sort();
    for (_, (i, j), (pi, pj)) in ordered {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri.max(rj)] = ri.min(rj);
            adjacency[i].push((pi, j, pj));
            adjacency[j].push((pj, i, pi));
        }
    }
    for list in &mut adjacency {
        list.sort();
    }

    let mut paths: Vec<Contour> = Vec::new();
    for root in 0..loops.len() {
        if find(&mut parent, root) != root {
            continue;
        }
        let mut points = Vec::new();
        tour(root, 0, None, &loops, &adjacency, &mut points);
        let contour = Contour::new(points, true);
        if contour.arc_length >= cfg.min_contour_len {
            paths.push(contour);
        }
    }
    paths.sort_by(|a, b| b.arc_length.total_cmp(&a.arc_length).then_with(|| a.points[0].cmp(&b.points[0])));
    let mut paths = paths.into_iter();
    let primary = paths.next().ok_or(FigureError::NoPath)?;
    Ok(GraphPaths { primary, secondary: paths.collect() })
}

fn erase_band(canvas: &mut Bitmap, erased: &mut Bitmap, seg: &Segment, thickness: f64, horizontal: bool) {
    let (a, b) = if horizontal { (seg.start, seg.end) } else { ((seg.start.1, seg.start.0), (seg.end.1, seg.end.0)) };
    let (lo, hi) = (a.0.min(b.0).floor() as i64 - 2, a.0.max(b.0).ceil() as i64 + 2);
    let slope = if b.0 != a.0 { (b.1 - a.1) / (b.0 - a.0) } else { 0.0 };
    let half = thickness / 2.0 + 1.0;
    for u in lo..=hi {
        let v = a.1 + slope * (u as f64 - a.0);
        for w in (v - half).floor() as i64..=(v + half).ceil() as i64 {
            if (w as f64 - v).abs() <= half {
                let (x, y) = if horizontal { (u, w) } else { (w, u) };
                canvas.set(x, y, false);
                erased.set(x, y, true);
            }
        }
    }
}

/// For each pair of pieces within `gap` (Chebyshev) of each other, the
/// closest pair of points as `(squared distance, index in i, index in j)`.
/// Points bordering an erased band may reach across it: they pair with other
/// such points up to `2 * gap + 2` away.
fn close_pairs(loops: &[Vec<(i32, i32)>], erased: &Bitmap, gap: i32) -> BTreeMap<(usize, usize), (i64, usize, usize)> {
    let far = 2 * gap + 2;
    let (w, h) = (erased.width() as i64, erased.height() as i64);
    let near_band = |x: i32, y: i32| (-2..=2).any(|dy| (-2..=2).any(|dx| erased.get((x + dx) as i64, (y + dy) as i64)));
    let mut label: Vec<Option<(usize, usize, bool)>> = vec![None; (w * h) as usize];
    let mut flags: Vec<Vec<bool>> = Vec::with_capacity(loops.len());
    for (i, pts) in loops.iter().enumerate() {
        let mut f = Vec::with_capacity(pts.len());
        for (k, &(x, y)) in pts.iter().enumerate() {
            let near = near_band(x, y);
            f.push(near);
            if x >= 0 && y >= 0 && (x as i64) < w && (y as i64) < h {
                label[(y as i64 * w + x as i64) as usize].get_or_insert((i, k, near));
            }
        }
        flags.push(f);
    }
    let mut best: BTreeMap<(usize, usize), (i64, usize, usize)> = BTreeMap::new();
    for (i, pts) in loops.iter().enumerate() {
        for (k, &(x, y)) in pts.iter().enumerate() {
            let near = flags[i][k];
            let radius = if near { far } else { gap };
            for dy in -radius..=radius {
                for dx in -radius..=radius {
                    let (nx, ny) = (x as i64 + dx as i64, y as i64 + dy as i64);
                    if nx < 0 || ny < 0 || nx >= w || ny >= h {
                        continue;
                    }
                    let Some((j, m, other_near)) = label[(ny * w + nx) as usize] else { continue };
                    let reach = if near && other_near { far } else { gap };
                    if j <= i || dx.abs() > reach || dy.abs() > reach {
                        continue;
                    }
                    let d = (dx * dx + dy * dy) as i64;
                    let entry = best.entry((i, j)).or_insert((d, k, m));
                    if (d, k, m) < *entry {
                        *entry = (d, k, m);
                    }
                }
            }
        }
    }
    best
}

/// Walks the loop of `piece` from `entry`, detouring through each child
/// piece over a straight bridge and back.
fn tour(
    piece: usize,
    entry: usize,
    parent: Option<usize>,
    loops: &[Vec<(i32, i32)>],
    adjacency: &[Vec<(usize, usize, usize)>],
    out: &mut Vec<(i32, i32)>,
) {
    let pts = &loops[piece];
    let n = pts.len();
    for k in 0..n {
        let idx = (entry + k) % n;
        let p = pts[idx];
        out.push(p);
        for &(mine, other, theirs) in &adjacency[piece] {
            if mine != idx || Some(other) == parent {
                continue;
            }
            let q = loops[other][theirs];
            let line = bresenham(p, q);
            out.extend_from_slice(&line[1..line.len() - 1]);
            tour(other, theirs, Some(piece), loops, adjacency, out);
            out.extend(line[1..line.len() - 1].iter().rev());
            out.push(p);
        }
    }
    if parent.is_some() {
        out.push(pts[entry]);
    }
}

pub(crate) fn bresenham(a: (i32, i32), b: (i32, i32)) -> Vec<(i32, i32)> {
    let (dx, dy) = ((b.0 - a.0).abs(), -(b.1 - a.1).abs());
    let (sx, sy) = (if a.0 < b.0 { 1 } else { -1 }, if a.1 < b.1 { 1 } else { -1 });
    let (mut x, mut y, mut err) = (a.0, a.1, dx + dy);
    let mut out = vec![a];
    while (x, y) != b {
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
        out.push((x, y));
    }
    out
}

/// Repeated axis detection: each detected figure's region is removed before
/// searching for the next.
pub fn detect_figures(cs: &[Contour], cfg: &FigureConfig) -> Vec<DetectedFigure> {
    let mut remaining: Vec<Contour> = cs.to_vec();
    let mut out = Vec::new();
    while out.len() < MAX_FIGURES {
        let Ok(frame) = detect_axes_with(&remaining, cfg) else { break };
        let region = frame.bbox.expand(4.0);
        let touches = |c: &Contour| c.points.iter().any(|p| region.contains(p.0 as f64, p.1 as f64));
        let inside: Vec<Contour> = remaining.iter().filter(|c| touches(c)).cloned().collect();
        let paths = extract_graph_path_with(&inside, &frame, cfg).ok();
        remaining.retain(|c| !touches(c));
        out.push(DetectedFigure { frame, paths });
    }
    out
}
