//! Building a [`PageModel`] from an ingestion bundle directory:
//! `words.json`, `formulas.tex.json`, `formula_boxes.json`, `page.png` (or
//! `page.pgm`), and an optional `annotations.json`.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::align::{align_formulas, DEFAULT_THRESHOLD};
use super::{DocError, FigureRegion, FormulaKind, FormulaRegion, GeometryLabel, OcrWord, PageModel, SCHEMA_VERSION};
use crate::figure::{
    binarize, detect_figures, extract_contours, filter_text_components, load_grayscale, make_mapping, Calibration,
    FigureConfig, Rect,
};

pub const WORDS_FILE: &str = "words.json";
pub const FORMULAS_FILE: &str = "formulas.tex.json";
pub const BOXES_FILE: &str = "formula_boxes.json";
pub const ANNOTATIONS_FILE: &str = "annotations.json";
pub const IMAGE_FILES: [&str; 2] = ["page.png", "page.pgm"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IngestConfig {
    pub figure: FigureConfig,
    pub align_threshold: f64,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig { figure: FigureConfig::default(), align_threshold: DEFAULT_THRESHOLD }
    }
}

/// Author-supplied extras the OCR services cannot provide.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Annotations {
    #[serde(default)]
    pub figures: Vec<FigureAnnotation>,
}

/// Applies to the detected figure whose box contains `at`, or to the
/// figure with the same index when `at` is absent.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FigureAnnotation {
    #[serde(default)]
    pub at: Option<(f64, f64)>,
    #[serde(default)]
    pub calibration: Option<Calibration>,
    #[serde(default)]
    pub labels: Vec<GeometryLabel>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormulaStatus {
    pub id: String,
    pub parsed: bool,
    pub boxed: bool,
    pub score: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FigureStatus {
    pub id: String,
    pub has_path: bool,
    pub secondary_paths: usize,
    pub calibrated: bool,
}

/// What ingestion found, for the command-line report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IngestReport {
    pub formulas: Vec<FormulaStatus>,
    pub figures: Vec<FigureStatus>,
    /// No axis pair was found anywhere on the page.
    pub no_axis_found: bool,
    /// Contours left after the text-length filter.
    pub figure_contours: usize,
    pub unmatched_boxes: usize,
}

fn read_json<T: DeserializeOwned>(dir: &Path, name: &str) -> Result<T, DocError> {
    let bytes = std::fs::read(dir.join(name)).map_err(|e| DocError::schema(name, format!("cannot read: {e}")))?;
    serde_json::from_slice(&bytes).map_err(|e| DocError::from_json(name, &e))
}

/// [`ingest_page_with`] under the default configuration, without the report.
pub fn ingest_page(dir: &Path) -> Result<PageModel, DocError> {
    ingest_page_with(dir, &IngestConfig::default()).map(|(doc, _)| doc)
}

pub fn ingest_page_with(dir: &Path, cfg: &IngestConfig) -> Result<(PageModel, IngestReport), DocError> {
    let words: Vec<OcrWord> = read_json(dir, WORDS_FILE)?;
    let latex: Vec<String> = read_json(dir, FORMULAS_FILE)?;
    let boxes: Vec<Rect> = read_json(dir, BOXES_FILE)?;
    let annotations: Annotations =
        if dir.join(ANNOTATIONS_FILE).exists() { read_json(dir, ANNOTATIONS_FILE)? } else { Annotations::default() };

    let image_name = IMAGE_FILES
        .iter()
        .find(|n| dir.join(n).exists())
        .ok_or_else(|| DocError::ImageUnreadable(format!("bundle has none of {}", IMAGE_FILES.join(", "))))?;
    let image = load_grayscale(&dir.join(image_name)).map_err(|e| DocError::ImageUnreadable(e.to_string()))?;
    let (width, height) = image.dimensions();
    let page = Rect::new(0.0, 0.0, width as f64, height as f64);
    let inside = |r: &Rect| r.x >= 0.0 && r.y >= 0.0 && r.right() <= page.w && r.bottom() <= page.h;

    for (i, w) in words.iter().enumerate() {
        if w.text.trim().is_empty() {
            return Err(DocError::schema(WORDS_FILE, format!("word {i}: empty text")));
        }
        if !inside(&w.bbox) {
            return Err(DocError::schema(WORDS_FILE, format!("word {i}: box outside the page")));
        }
        if !(0.0..=1.0).contains(&w.conf) {
            return Err(DocError::schema(WORDS_FILE, format!("word {i}: conf outside [0, 1]")));
        }
    }
    for (i, b) in boxes.iter().enumerate() {
        if !inside(b) || b.w <= 0.0 || b.h <= 0.0 {
            return Err(DocError::schema(BOXES_FILE, format!("box {i}: outside the page or empty")));
        }
        if boxes[..i].contains(b) {
            return Err(DocError::schema(BOXES_FILE, format!("box {i}: duplicate")));
        }
    }

    let latex: Vec<String> = latex.iter().map(|l| crate::expr::normalize_ocr(l)).collect();
    let assignments = align_formulas(&words, &latex, &boxes, cfg.align_threshold);
    let formulas: Vec<FormulaRegion> = assignments
        .iter()
        .map(|a| {
            let bbox = a.box_index.map(|j| boxes[j]);
            let kind = bbox.map_or(FormulaKind::Display, |b| formula_kind(&words, &b));
            FormulaRegion::new(format!("f{}", a.latex_index), &latex[a.latex_index], bbox, kind, a.score)
        })
        .collect();
    let used: Vec<usize> = assignments.iter().filter_map(|a| a.box_index).collect();
    let unmatched_boxes: Vec<Rect> =
        boxes.iter().enumerate().filter(|(j, _)| !used.contains(j)).map(|(_, b)| *b).collect();

    let contours = filter_text_components(&extract_contours(&binarize(&image, cfg.figure.binarize_threshold)), cfg.figure.min_contour_len);
    let detected = detect_figures(&contours, &cfg.figure);
    let mut figures = Vec::new();
    for (i, fig) in detected.into_iter().enumerate() {
        let note = annotations
            .figures
            .iter()
            .find(|a| a.at.is_some_and(|p| fig.frame.bbox.expand(4.0).contains(p.0, p.1)))
            .or_else(|| annotations.figures.get(i).filter(|a| a.at.is_none()));
        let calibration = note.and_then(|n| n.calibration.clone());
        let coord_map = make_mapping(&fig.frame, calibration.as_ref()).ok();
        figures.push(FigureRegion {
            id: format!("g{i}"),
            frame: fig.frame,
            paths: fig.paths,
            calibration,
            coord_map,
            labels: note.map(|n| n.labels.clone()).unwrap_or_default(),
        });
    }

    let report = IngestReport {
        formulas: formulas
            .iter()
            .map(|f| FormulaStatus {
                id: f.id.clone(),
                parsed: f.expr.is_some(),
                boxed: f.bbox.is_some(),
                score: f.score,
                error: f.parse_error.clone(),
            })
            .collect(),
        figures: figures
            .iter()
            .map(|g| FigureStatus {
                id: g.id.clone(),
                has_path: g.paths.is_some(),
                secondary_paths: g.paths.as_ref().map_or(0, |p| p.secondary.len()),
                calibrated: g.coord_map.is_some(),
            })
            .collect(),
        no_axis_found: figures.is_empty(),
        figure_contours: contours.len(),
        unmatched_boxes: unmatched_boxes.len(),
    };
    let doc = PageModel {
        schema_version: SCHEMA_VERSION,
        image: image_name.to_string(),
        width,
        height,
        words,
        formulas,
        figures,
        unmatched_boxes,
    };
    doc.validate()?;
    Ok((doc, report))
}

/// Display when no word outside the box shares its text line.
fn formula_kind(words: &[OcrWord], b: &Rect) -> FormulaKind {
    let outside_on_line = words.iter().any(|w| {
        let mostly_inside = w.bbox.intersection(b).is_some_and(|i| i.area() >= 0.5 * w.bbox.area());
        let overlaps_band = w.bbox.y < b.bottom() && w.bbox.bottom() > b.y;
        !mostly_inside && overlaps_band
    });
    if outside_on_line {
        FormulaKind::Inline
    } else {
        FormulaKind::Display
    }
}
