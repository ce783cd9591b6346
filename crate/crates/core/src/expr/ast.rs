use std::fmt;

use super::number::Number;

/// Character offsets `[start, end)` into the normalized LaTeX source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn cover(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sqrt,
    Sin,
    Cos,
    Tan,
    Ln,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Ln => "ln",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "ln" => Func::Ln,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum RelOp {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

impl RelOp {
    pub fn latex(self) -> &'static str {
        match self {
            RelOp::Eq => "=",
            RelOp::Lt => "<",
            RelOp::Gt => ">",
            RelOp::Le => "\\leq",
            RelOp::Ge => "\\geq",
        }
    }

    /// Direction after multiplying or dividing both sides by a negative.
    pub fn flipped(self) -> RelOp {
        match self {
            RelOp::Eq => RelOp::Eq,
            RelOp::Lt => RelOp::Gt,
            RelOp::Gt => RelOp::Lt,
            RelOp::Le => RelOp::Ge,
            RelOp::Ge => RelOp::Le,
        }
    }

    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            RelOp::Eq => (lhs - rhs).abs() <= tol,
            RelOp::Lt => lhs < rhs,
            RelOp::Gt => lhs > rhs,
            RelOp::Le => lhs <= rhs,
            RelOp::Ge => lhs >= rhs,
        }
    }
}

/// A node of the math AST together with the source span it was parsed from.
///
/// Equality is structural: spans are ignored.
#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Option<Span>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Literal(Number),
    Variable(String),
    Neg(Box<Expr>),
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Function { func: Func, arg: Box<Expr> },
    Summation { index: String, lower: Box<Expr>, upper: Box<Expr>, body: Box<Expr> },
    Indexed { base: String, subscript: Box<Expr> },
    Relation { lhs: Box<Expr>, op: RelOp, rhs: Box<Expr> },
    /// Three or more expressions joined by `=`.
    Chain(Vec<Expr>),
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl From<ExprKind> for Expr {
    fn from(kind: ExprKind) -> Self {
        Expr { kind, span: None }
    }
}

impl Expr {
    pub fn with_span(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span: Some(span) }
    }

    pub fn number(value: Number) -> Self {
        if value.is_negative() {
            Expr::neg(ExprKind::Literal(-value).into())
        } else {
            ExprKind::Literal(value).into()
        }
    }

    pub fn integer(value: i64) -> Self {
        Expr::number(Number::from_integer(value))
    }

    /// Literal for a float, negative values as `Neg(Literal)` so the result
    /// stays in the shape the parser produces.
    pub fn from_f64(value: f64) -> Option<Self> {
        Number::from_f64(value).map(Expr::number)
    }

    pub fn var(name: impl Into<String>) -> Self {
        ExprKind::Variable(name.into()).into()
    }

    pub fn neg(inner: Expr) -> Self {
        ExprKind::Neg(Box::new(inner)).into()
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }.into()
    }

    pub fn add(lhs: Expr, rhs: Expr) -> Self {
        Expr::binary(BinOp::Add, lhs, rhs)
    }

    pub fn sub(lhs: Expr, rhs: Expr) -> Self {
        Expr::binary(BinOp::Sub, lhs, rhs)
    }

    pub fn mul(lhs: Expr, rhs: Expr) -> Self {
        Expr::binary(BinOp::Mul, lhs, rhs)
    }

    pub fn div(lhs: Expr, rhs: Expr) -> Self {
        Expr::binary(BinOp::Div, lhs, rhs)
    }

    pub fn pow(base: Expr, exponent: Expr) -> Self {
        Expr::binary(BinOp::Pow, base, exponent)
    }

    pub fn func(func: Func, arg: Expr) -> Self {
        ExprKind::Function { func, arg: Box::new(arg) }.into()
    }

    pub fn sum(index: impl Into<String>, lower: Expr, upper: Expr, body: Expr) -> Self {
        ExprKind::Summation {
            index: index.into(),
            lower: Box::new(lower),
            upper: Box::new(upper),
            body: Box::new(body),
        }
        .into()
    }

    pub fn indexed(base: impl Into<String>, subscript: Expr) -> Self {
        ExprKind::Indexed { base: base.into(), subscript: Box::new(subscript) }.into()
    }

    pub fn relation(lhs: Expr, op: RelOp, rhs: Expr) -> Self {
        ExprKind::Relation { lhs: Box::new(lhs), op, rhs: Box::new(rhs) }.into()
    }

    pub fn chain(parts: Vec<Expr>) -> Self {
        debug_assert!(parts.len() >= 3);
        ExprKind::Chain(parts).into()
    }

    pub fn as_literal(&self) -> Option<&Number> {
        match &self.kind {
            ExprKind::Literal(n) => Some(n),
            _ => None,
        }
    }

    /// Constant value when the node is a literal or a negated literal.
    pub fn as_constant(&self) -> Option<Number> {
        match &self.kind {
            ExprKind::Literal(n) => Some(n.clone()),
            ExprKind::Neg(inner) => inner.as_literal().map(|n| -n),
            _ => None,
        }
    }

    pub fn is_relation(&self) -> bool {
        matches!(self.kind, ExprKind::Relation { .. } | ExprKind::Chain(_))
    }

    /// Immediate children in source order.
    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Literal(_) | ExprKind::Variable(_) => vec![],
            ExprKind::Neg(inner) => vec![inner],
            ExprKind::Binary { lhs, rhs, .. } | ExprKind::Relation { lhs, rhs, .. } => vec![lhs, rhs],
            ExprKind::Function { arg, .. } => vec![arg],
            ExprKind::Summation { lower, upper, body, .. } => vec![lower, upper, body],
            ExprKind::Indexed { subscript, .. } => vec![subscript],
            ExprKind::Chain(parts) => parts.iter().collect(),
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children().into_iter().map(Expr::depth).max().unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().into_iter().map(Expr::node_count).sum::<usize>()
    }

    /// Pre-order walk over every node.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        for child in self.children() {
            child.visit(f);
        }
    }

    /// Rebuilds the tree bottom-up, applying `f` to every node after its
    /// children have been mapped.
    pub fn map_bottom_up(&self, f: &mut impl FnMut(Expr) -> Expr) -> Expr {
        let kind = match &self.kind {
            ExprKind::Literal(_) | ExprKind::Variable(_) => self.kind.clone(),
            ExprKind::Neg(inner) => ExprKind::Neg(Box::new(inner.map_bottom_up(f))),
            ExprKind::Binary { op, lhs, rhs } => ExprKind::Binary {
                op: *op,
                lhs: Box::new(lhs.map_bottom_up(f)),
                rhs: Box::new(rhs.map_bottom_up(f)),
            },
            ExprKind::Function { func, arg } => ExprKind::Function { func: *func, arg: Box::new(arg.map_bottom_up(f)) },
            ExprKind::Summation { index, lower, upper, body } => ExprKind::Summation {
                index: index.clone(),
                lower: Box::new(lower.map_bottom_up(f)),
                upper: Box::new(upper.map_bottom_up(f)),
                body: Box::new(body.map_bottom_up(f)),
            },
            ExprKind::Indexed { base, subscript } => {
                ExprKind::Indexed { base: base.clone(), subscript: Box::new(subscript.map_bottom_up(f)) }
            }
            ExprKind::Relation { lhs, op, rhs } => ExprKind::Relation {
                lhs: Box::new(lhs.map_bottom_up(f)),
                op: *op,
                rhs: Box::new(rhs.map_bottom_up(f)),
            },
            ExprKind::Chain(parts) => ExprKind::Chain(parts.iter().map(|p| p.map_bottom_up(f)).collect()),
        };
        f(Expr { kind, span: self.span })
    }

    /// The node whose span is exactly `span`, if any.
    pub fn find_by_span(&self, span: Span) -> Option<&Expr> {
        if self.span == Some(span) && matches!(self.kind, ExprKind::Literal(_) | ExprKind::Variable(_)) {
            return Some(self);
        }
        for child in self.children() {
            if let Some(found) = child.find_by_span(span) {
                return Some(found);
            }
        }
        if self.span == Some(span) {
            return Some(self);
        }
        None
    }

    /// Replaces the node whose span is exactly `span` (leaves preferred).
    pub fn replace_at_span(&self, span: Span, replacement: &Expr) -> Option<Expr> {
        let mut replaced = false;
        let out = self.replace_rec(span, replacement, &mut replaced);
        replaced.then_some(out)
    }

    fn replace_rec(&self, span: Span, replacement: &Expr, done: &mut bool) -> Expr {
        if *done {
            return self.clone();
        }
        if self.span == Some(span) && self.children().is_empty() {
            *done = true;
            let mut r = replacement.clone();
            r.span = self.span;
            return r;
        }
        let mut mapped = self.clone();
        match &mut mapped.kind {
            ExprKind::Literal(_) | ExprKind::Variable(_) => {}
            ExprKind::Neg(inner) => **inner = inner.replace_rec(span, replacement, done),
            ExprKind::Binary { lhs, rhs, .. } | ExprKind::Relation { lhs, rhs, .. } => {
                **lhs = lhs.replace_rec(span, replacement, done);
                **rhs = rhs.replace_rec(span, replacement, done);
            }
            ExprKind::Function { arg, .. } => **arg = arg.replace_rec(span, replacement, done),
            ExprKind::Summation { lower, upper, body, .. } => {
                **lower = lower.replace_rec(span, replacement, done);
                **upper = upper.replace_rec(span, replacement, done);
                **body = body.replace_rec(span, replacement, done);
            }
            ExprKind::Indexed { subscript, .. } => **subscript = subscript.replace_rec(span, replacement, done),
            ExprKind::Chain(parts) => {
                for part in parts.iter_mut() {
                    *part = part.replace_rec(span, replacement, done);
                }
            }
        }
        mapped
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::render::render_latex(self))
    }
}
