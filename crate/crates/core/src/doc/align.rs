//! Assigning position-free LaTeX strings to detected formula boxes.

use serde::{Deserialize, Serialize};

use super::OcrWord;
use crate::figure::Rect;

/// Minimum similarity for a latex/box pair to be assigned.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub latex_index: usize,
    /// `None`: no box matched; the formula is display-only.
    pub box_index: Option<usize>,
    pub score: f64,
}

/// Drops markup characters (`\`, braces, `^`, `_`) and all whitespace.
pub fn strip_latex(s: &str) -> String {
    s.chars().filter(|c| !matches!(c, '\\' | '{' | '}' | '^' | '_') && !c.is_whitespace()).collect()
}

/// Normalized edit similarity of the stripped strings, in `[0, 1]`.
pub fn similarity(latex: &str, text: &str) -> f64 {
    let (a, b) = (strip_latex(latex), strip_latex(text));
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    strsim::normalized_levenshtein(&a, &b)
}

/// Words overlapping `b` by at least half their area, in reading order,
/// joined by spaces.
pub fn box_text(words: &[OcrWord], b: &Rect) -> String {
    let mut inside: Vec<&OcrWord> = words
        .iter()
        .filter(|w| w.bbox.intersection(b).is_some_and(|i| i.area() >= 0.5 * w.bbox.area()))
        .collect();
    let line_height = inside.iter().map(|w| w.bbox.h).fold(0.0, f64::max).max(1.0);
    inside.sort_by(|p, q| {
        let (lp, lq) = ((p.bbox.center().1 / line_height).floor(), (q.bbox.center().1 / line_height).floor());
        lp.total_cmp(&lq).then(p.bbox.x.total_cmp(&q.bbox.x))
    });
    inside.iter().map(|w| w.text.as_str()).collect::<Vec<_>>().join(" ")
}

/// `scores[i][j]`: similarity of latex `i` to the words under box `j`.
pub fn score_matrix(words: &[OcrWord], latex: &[String], boxes: &[Rect]) -> Vec<Vec<f64>> {
    let texts: Vec<String> = boxes.iter().map(|b| box_text(words, b)).collect();
    latex.iter().map(|l| texts.iter().map(|t| similarity(l, t)).collect()).collect()
}

/// Maximum-total-score matching of latex strings to boxes; pairs below
/// `threshold` never match.
pub fn align_formulas(words: &[OcrWord], latex: &[String], boxes: &[Rect], threshold: f64) -> Vec<Assignment> {
    let scores = score_matrix(words, latex, boxes);
    let matched = max_weight_matching(&scores, threshold);
    matched
        .iter()
        .enumerate()
        .map(|(i, &j)| Assignment { latex_index: i, box_index: j, score: j.map_or(0.0, |j| scores[i][j]) })
        .collect()
}

/// Hungarian algorithm on the square completion of `scores` (weights below
/// `threshold` count as zero). Returns the column matched to each row.
pub fn max_weight_matching(scores: &[Vec<f64>], threshold: f64) -> Vec<Option<usize>> {
    let rows = scores.len();
    let cols = scores.first().map_or(0, Vec::len);
    let n = rows.max(cols);
    if rows == 0 || cols == 0 {
        return vec![None; rows];
    }
    let weight = |i: usize, j: usize| -> f64 {
        if i < rows && j < cols && scores[i][j] >= threshold {
            scores[i][j]
        } else {
            0.0
        }
    };
    // Minimizes cost = -weight; 1-based potentials as in the classic
    // shortest-augmenting-path formulation.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = -weight(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![None; rows];
    for j in 1..=n {
        let i = p[j];
        if i >= 1 && i <= rows && j <= cols && weight(i - 1, j - 1) > 0.0 {
            out[i - 1] = Some(j - 1);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(text: &str, x: f64) -> OcrWord {
        OcrWord { text: text.into(), bbox: Rect::new(x, 10.0, 10.0, 14.0), conf: 0.9 }
    }

    #[test]
    fn walkthrough_similarity() {
        let words: Vec<OcrWord> =
            ["y", "=", "(x", "3)2", "1"].iter().enumerate().map(|(i, t)| word(t, 10.0 + 12.0 * i as f64)).collect();
        let b = Rect::new(5.0, 5.0, 80.0, 24.0);
        assert_eq!(box_text(&words, &b), "y = (x 3)2 1");
        let s = similarity("y=(x+3)^{2}+1", &box_text(&words, &b));
        assert!((s - 0.8).abs() < 1e-12);
        let a = align_formulas(&words, &["y=(x+3)^{2}+1".to_string()], &[b], DEFAULT_THRESHOLD);
        assert_eq!(a[0].box_index, Some(0));
    }

    #[test]
    fn empty_inputs() {
        assert!(align_formulas(&[], &[], &[], DEFAULT_THRESHOLD).is_empty());
        let a = align_formulas(&[], &["x".to_string()], &[], DEFAULT_THRESHOLD);
        assert_eq!(a[0].box_index, None);
    }

    #[test]
    fn crossed_scores_prefer_total() {
        // greedy would take 0.9 and leave 0.1; optimum pairs 0.8 + 0.8
        let scores = vec![vec![0.9, 0.8], vec![0.8, 0.1]];
        assert_eq!(max_weight_matching(&scores, 0.0), vec![Some(1), Some(0)]);
    }

    #[test]
    fn threshold_leaves_rows_unmatched() {
        let scores = vec![vec![0.4, 0.3], vec![0.2, 0.9], vec![0.6, 0.1]];
        assert_eq!(max_weight_matching(&scores, 0.5), vec![None, Some(1), Some(0)]);
    }
}
