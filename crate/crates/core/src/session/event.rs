use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::Span;

/// A user action. The tag doubles as the protocol op name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Event {
    /// Draws `formula` over `figure`.
    Bind { formula: String, figure: String },
    /// Turns the literal at `span` (character offsets into the formula's
    /// LaTeX) into a variable.
    Promote { formula: String, span: Span },
    Set { variable: String, value: f64 },
    /// Moves a plot so it passes through the world point `to`, solving for
    /// `variable`.
    Drag { plot: String, to: (f64, f64), variable: String },
    /// `None` clears the highlight.
    Highlight { symbol: Option<String> },
    Hint {
        formula: String,
        #[serde(default)]
        target: Option<String>,
    },
    Example { formula: String },
}

impl Event {
    pub fn op(&self) -> &'static str {
        match self {
            Event::Bind { .. } => "bind",
            Event::Promote { .. } => "promote",
            Event::Set { .. } => "set",
            Event::Drag { .. } => "drag",
            Event::Highlight { .. } => "highlight",
            Event::Hint { .. } => "hint",
            Event::Example { .. } => "example",
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Serialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum SessionError {
    #[error("unknown formula {0}")]
    UnknownFormula(String),
    #[error("unknown figure {0}")]
    UnknownFigure(String),
    #[error("unknown plot {0}")]
    UnknownPlot(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("formula {0} did not parse and is display-only")]
    DisplayOnly(String),
    #[error("figure {0} has no coordinate mapping")]
    MissingCalibration(String),
    #[error("formula {0} cannot be plotted: {1}")]
    NotPlottable(String, String),
    #[error("span does not address a literal")]
    SpanNotLiteral,
    #[error("variable {variable} does not occur in plot {plot}")]
    VariableNotInPlot { variable: String, plot: String },
    #[error("no value of {0} moves the plot through the point")]
    DragUnsolvable(String),
    #[error("feature unavailable for this formula: {0}")]
    FeatureUnavailable(String),
    #[error("value must be finite")]
    NonFinite,
    #[error("binding would create a dependency cycle")]
    Cycle,
}
