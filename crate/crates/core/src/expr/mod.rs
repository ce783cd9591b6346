//! Math expressions: parsing the OCR LaTeX subset, rendering it back,
//! evaluation and substitution.

mod ast;
mod eval;
mod number;
mod parse;
mod render;
mod transform;

pub use ast::{BinOp, Expr, ExprKind, Func, RelOp, Span};
pub use eval::{evaluate, relation_holds, relation_residual, relation_sides, Environment, EvalError};
pub use number::Number;
pub use parse::{normalize_ocr, parse_latex, SyntaxError};
pub use render::render_latex;
pub use transform::{free_scalar_variables, free_variables, substitute, substitute_env};
