//! Wire messages shared by the service, the CLI, and clients.
//!
//! Requests carry one [`Event`] as a JSON object tagged by `op`. Successful
//! responses and pushes are [`StateMessage`]s; failures are [`ErrorBody`]s.

use augmath::doc::SCHEMA_VERSION;
use augmath::session::{Event, SessionError};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Versioned together with the document schema.
pub const PROTOCOL_VERSION: u32 = SCHEMA_VERSION;

/// `{"session": id, "revision": n, "state": RenderState}`. The state is
/// embedded verbatim from the session's canonical JSON.
pub fn state_message(session: &str, revision: u64, state_json: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(state_json.len() + 64);
    out.extend_from_slice(b"{\"session\":");
    out.extend_from_slice(serde_json::to_string(session).expect("strings serialize").as_bytes());
    out.extend_from_slice(format!(",\"revision\":{revision},\"state\":").as_bytes());
    out.extend_from_slice(state_json);
    out.push(b'}');
    out
}

/// Parsed form of [`state_message`], for clients and tests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateMessage {
    pub session: String,
    pub revision: u64,
    pub state: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: ErrorDetail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorDetail {
    /// Machine-readable error kind, e.g. `unknown_session`, `drag_unsolvable`.
    pub kind: String,
    pub message: String,
    /// JSON pointer to the offending part of a malformed payload.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pointer: Option<String>,
    /// Extra data of a rejected event (the variable name, ...).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
    /// Session revision, unchanged by the rejected request.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revision: Option<u64>,
}

impl ErrorDetail {
    pub fn new(kind: &str, message: impl Into<String>) -> Self {
        ErrorDetail { kind: kind.into(), message: message.into(), pointer: None, detail: None, revision: None }
    }

    pub fn rejected(e: &SessionError, revision: u64) -> Self {
        let tagged = serde_json::to_value(e).expect("session errors serialize");
        ErrorDetail {
            kind: tagged["kind"].as_str().unwrap_or("rejected").to_string(),
            message: e.to_string(),
            pointer: None,
            detail: tagged.get("detail").cloned(),
            revision: Some(revision),
        }
    }

    pub fn body(self) -> Vec<u8> {
        serde_json::to_vec(&ErrorBody { error: self }).expect("errors serialize")
    }
}

/// Decodes one event, reporting the JSON pointer of the first offending
/// value on failure.
pub fn parse_event(bytes: &[u8]) -> Result<Event, ErrorDetail> {
    let malformed = |message: String, pointer: String| {
        let mut detail = ErrorDetail::new("malformed_payload", message);
        detail.pointer = Some(pointer);
        detail
    };
    let value: Value = serde_json::from_slice(bytes).map_err(|e| malformed(e.to_string(), String::new()))?;
    serde_json::from_value(value.clone()).map_err(|e| {
        let pointer = locate(&value).unwrap_or_default();
        malformed(e.to_string(), pointer)
    })
}

/// Field-level mirrors of the event variants. A tagged enum buffers its
/// input and loses the path of a bad field; these recover it.
#[allow(dead_code)]
mod shape {
    use augmath::expr::Span;
    use serde::Deserialize;

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Bind {
        formula: String,
        figure: String,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Promote {
        formula: String,
        span: Span,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Set {
        variable: String,
        value: f64,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Drag {
        plot: String,
        to: (f64, f64),
        variable: String,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Highlight {
        symbol: Option<String>,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Hint {
        formula: String,
        target: Option<String>,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Example {
        formula: String,
    }
}

/// Pointer of the first bad field of an event object, when one can be named.
fn locate(value: &Value) -> Option<String> {
    let mut fields = value.as_object()?.clone();
    let op = fields.remove("op")?;
    let fields = Value::Object(fields);
    let path = match op.as_str()? {
        "bind" => path_of::<shape::Bind>(&fields),
        "promote" => path_of::<shape::Promote>(&fields),
        "set" => path_of::<shape::Set>(&fields),
        "drag" => path_of::<shape::Drag>(&fields),
        "highlight" => path_of::<shape::Highlight>(&fields),
        "hint" => path_of::<shape::Hint>(&fields),
        "example" => path_of::<shape::Example>(&fields),
        _ => return Some("/op".into()),
    }?;
    Some(path)
}

fn path_of<T: serde::de::DeserializeOwned>(fields: &Value) -> Option<String> {
    match serde_path_to_error::deserialize::<_, T>(fields) {
        Ok(_) => None,
        Err(err) => Some(pointer(err.path())),
    }
}

fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

/// Summary of the document's regions for the list-regions endpoint.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Regions {
    pub protocol_version: u32,
    pub formulas: Vec<FormulaRegionInfo>,
    pub figures: Vec<FigureRegionInfo>,
    pub unmatched_boxes: Vec<augmath::figure::Rect>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormulaRegionInfo {
    pub id: String,
    pub latex: String,
    #[serde(rename = "box")]
    pub bbox: Option<augmath::figure::Rect>,
    pub kind: augmath::doc::FormulaKind,
    pub interactive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FigureRegionInfo {
    pub id: String,
    #[serde(rename = "box")]
    pub bbox: augmath::figure::Rect,
    pub calibrated: bool,
    pub has_path: bool,
}

impl Regions {
    pub fn of(doc: &augmath::doc::PageModel) -> Self {
        Regions {
            protocol_version: PROTOCOL_VERSION,
            formulas: doc
                .formulas
                .iter()
                .map(|f| FormulaRegionInfo {
                    id: f.id.clone(),
                    latex: f.latex.clone(),
                    bbox: f.bbox,
                    kind: f.kind,
                    interactive: f.is_interactive(),
                })
                .collect(),
            figures: doc
                .figures
                .iter()
                .map(|g| FigureRegionInfo {
                    id: g.id.clone(),
                    bbox: g.frame.bbox,
                    calibrated: g.coord_map.is_some(),
                    has_path: g.paths.is_some(),
                })
                .collect(),
            unmatched_boxes: doc.unmatched_boxes.clone(),
        }
    }
}
