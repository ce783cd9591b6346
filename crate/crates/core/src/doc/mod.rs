//! Page documents: the OCR ingestion bundle, formula alignment, figure
//! regions, and versioned persistence.

mod align;
mod fixture;
mod ingest;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{normalize_ocr, parse_latex, render_latex, Expr};
use crate::figure::{AxisFrame, Calibration, CoordMap, GraphPaths, Rect, Segment};

pub use align::{
    align_formulas, box_text, max_weight_matching, score_matrix, similarity, strip_latex, Assignment, DEFAULT_THRESHOLD,
};
pub use fixture::{walkthrough_figure_spec, write_walkthrough_bundle, WALKTHROUGH_FORMULAS};
pub use ingest::{ingest_page, ingest_page_with, Annotations, FigureAnnotation, IngestConfig, IngestReport};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum DocError {
    #[error("{file}:{line}:{column}: {message}")]
    Schema { file: String, line: usize, column: usize, message: String },
    #[error("page image unreadable: {0}")]
    ImageUnreadable(String),
    #[error("document schema version {found} is not supported (reader supports {supported})")]
    VersionMismatch { found: u32, supported: u32 },
}

impl DocError {
    pub fn schema(file: impl Into<String>, message: impl Into<String>) -> Self {
        DocError::Schema { file: file.into(), line: 0, column: 0, message: message.into() }
    }

    pub(crate) fn from_json(file: &str, e: &serde_json::Error) -> Self {
        DocError::Schema { file: file.into(), line: e.line(), column: e.column(), message: e.to_string() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OcrWord {
    pub text: String,
    #[serde(rename = "box")]
    pub bbox: Rect,
    pub conf: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaKind {
    Inline,
    Display,
}

/// A formula from the math OCR. `expr` is absent when the LaTeX failed to
/// parse; `bbox` is absent when no detected box matched it. Either way the
/// region stays display-only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FormulaRecord", into = "FormulaRecord")]
pub struct FormulaRegion {
    pub id: String,
    pub latex: String,
    pub expr: Option<Expr>,
    pub parse_error: Option<String>,
    pub bbox: Option<Rect>,
    pub kind: FormulaKind,
    pub score: f64,
}

impl FormulaRegion {
    /// Normalizes and parses `latex`.
    pub fn new(id: impl Into<String>, latex: &str, bbox: Option<Rect>, kind: FormulaKind, score: f64) -> Self {
        let latex = normalize_ocr(latex);
        let (expr, parse_error) = match parse_latex(&latex) {
            Ok(e) => (Some(e), None),
            Err(e) => (None, Some(e.to_string())),
        };
        FormulaRegion { id: id.into(), latex, expr, parse_error, bbox, kind, score }
    }

    pub fn is_interactive(&self) -> bool {
        self.expr.is_some()
    }
}

#[derive(Serialize, Deserialize)]
struct FormulaRecord {
    id: String,
    latex: String,
    /// Canonical rendering of the parsed expression, for readers.
    expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parse_error: Option<String>,
    #[serde(rename = "box")]
    bbox: Option<Rect>,
    kind: FormulaKind,
    score: f64,
}

impl From<FormulaRegion> for FormulaRecord {
    fn from(f: FormulaRegion) -> Self {
        FormulaRecord {
            id: f.id,
            latex: f.latex,
            expr: f.expr.as_ref().map(render_latex),
            parse_error: f.parse_error,
            bbox: f.bbox,
            kind: f.kind,
            score: f.score,
        }
    }
}

impl TryFrom<FormulaRecord> for FormulaRegion {
    type Error = String;

    fn try_from(r: FormulaRecord) -> Result<Self, String> {
        let region = FormulaRegion::new(r.id, &r.latex, r.bbox, r.kind, r.score);
        let rendered = region.expr.as_ref().map(render_latex);
        if rendered != r.expr {
            return Err(format!("formula {}: expr does not match its latex", region.id));
        }
        Ok(region)
    }
}

/// A named piece of a figure (for example a triangle side), tagged by the
/// document author.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryLabel {
    pub name: String,
    pub segment: Segment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FigureRegion {
    pub id: String,
    pub frame: AxisFrame,
    pub paths: Option<GraphPaths>,
    pub calibration: Option<Calibration>,
    /// Absent when the calibration was degenerate.
    pub coord_map: Option<CoordMap>,
    #[serde(default)]
    pub labels: Vec<GeometryLabel>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PageModel {
    pub schema_version: u32,
    /// Page image file name, relative to the document.
    pub image: String,
    pub width: u32,
    pub height: u32,
    pub words: Vec<OcrWord>,
    pub formulas: Vec<FormulaRegion>,
    pub figures: Vec<FigureRegion>,
    /// Detected formula boxes no latex string matched.
    #[serde(default)]
    pub unmatched_boxes: Vec<Rect>,
}

impl PageModel {
    pub fn formula(&self, id: &str) -> Option<&FormulaRegion> {
        self.formulas.iter().find(|f| f.id == id)
    }

    pub fn figure(&self, id: &str) -> Option<&FigureRegion> {
        self.figures.iter().find(|f| f.id == id)
    }

    pub fn page_rect(&self) -> Rect {
        Rect::new(0.0, 0.0, self.width as f64, self.height as f64)
    }

    /// Checks the page-level invariants.
    pub fn validate(&self) -> Result<(), DocError> {
        let page = self.page_rect();
        let inside = |r: &Rect| r.x >= 0.0 && r.y >= 0.0 && r.right() <= page.w && r.bottom() <= page.h && r.w >= 0.0 && r.h >= 0.0;
        for (i, w) in self.words.iter().enumerate() {
            if w.text.trim().is_empty() {
                return Err(DocError::schema("words", format!("word {i} has empty text")));
            }
            if !inside(&w.bbox) {
                return Err(DocError::schema("words", format!("word {i} box lies outside the page")));
            }
            if !(0.0..=1.0).contains(&w.conf) {
                return Err(DocError::schema("words", format!("word {i} confidence outside [0, 1]")));
            }
        }
        let mut ids = std::collections::BTreeSet::new();
        let mut boxes: Vec<Rect> = Vec::new();
        for f in &self.formulas {
            if !ids.insert(f.id.clone()) {
                return Err(DocError::schema("formulas", format!("duplicate formula id {}", f.id)));
            }
            if let Some(b) = &f.bbox {
                if !inside(b) {
                    return Err(DocError::schema("formulas", format!("formula {} box lies outside the page", f.id)));
                }
                if boxes.contains(b) {
                    return Err(DocError::schema("formulas", format!("formula {} shares a box", f.id)));
                }
                boxes.push(*b);
            }
        }
        for g in &self.figures {
            if !ids.insert(g.id.clone()) {
                return Err(DocError::schema("figures", format!("duplicate region id {}", g.id)));
            }
            if !inside(&g.frame.bbox) {
                return Err(DocError::schema("figures", format!("figure {} lies outside the page", g.id)));
            }
        }
        Ok(())
    }
}

/// Pretty-printed UTF-8 JSON.
pub fn save_document(doc: &PageModel) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(doc).expect("documents serialize");
    out.push(b'\n');
    out
}

/// Rejects documents written under another schema version.
pub fn load_document(bytes: &[u8]) -> Result<PageModel, DocError> {
    #[derive(Deserialize)]
    struct Header {
        schema_version: u32,
    }
    let header: Header = serde_json::from_slice(bytes).map_err(|e| DocError::from_json("document", &e))?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(DocError::VersionMismatch { found: header.schema_version, supported: SCHEMA_VERSION });
    }
    let doc: PageModel = serde_json::from_slice(bytes).map_err(|e| DocError::from_json("document", &e))?;
    doc.validate()?;
    Ok(doc)
}
