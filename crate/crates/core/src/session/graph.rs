use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::cas::{circle_params, explicit_rhs};
use crate::expr::{free_scalar_variables, Environment, Expr, ExprKind, RelOp, Span};

/// Plot coordinates: never substituted into displays, only probed.
pub const COORDINATES: [&str; 2] = ["x", "y"];

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VariableOrigin {
    /// A free symbol of a formula.
    Parameter,
    /// A literal turned into a variable.
    Promoted { formula: String, span: Span },
    Coordinate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariableNode {
    pub name: String,
    pub value: f64,
    pub range: (f64, f64),
    pub origin: VariableOrigin,
}

impl VariableNode {
    pub fn is_coordinate(&self) -> bool {
        self.origin == VariableOrigin::Coordinate
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormulaNode {
    pub id: String,
    /// Current expression, with promoted literals replaced by variables.
    pub expr: Option<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotNode {
    pub id: String,
    pub figure: String,
    pub formulas: Vec<String>,
    /// Last drag target per formula; sampled exactly so the curve passes
    /// through it.
    pub anchors: BTreeMap<String, (f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HintNode {
    pub formula: String,
    pub target: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct BindingGraph {
    pub variables: BTreeMap<String, VariableNode>,
    /// In document order.
    pub formulas: Vec<FormulaNode>,
    pub plots: Vec<PlotNode>,
    pub hints: Vec<HintNode>,
    pub examples: Vec<String>,
    pub highlight: Option<String>,
    pub promoted: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum NodeRef<'a> {
    Variable(&'a str),
    Formula(&'a str),
    Plot(&'a str),
    Hint(&'a str),
    Example(&'a str),
    Highlight,
}

impl BindingGraph {
    pub fn formula(&self, id: &str) -> Option<&FormulaNode> {
        self.formulas.iter().find(|f| f.id == id)
    }

    pub fn formula_mut(&mut self, id: &str) -> Option<&mut FormulaNode> {
        self.formulas.iter_mut().find(|f| f.id == id)
    }

    pub fn plot(&self, id: &str) -> Option<&PlotNode> {
        self.plots.iter().find(|p| p.id == id)
    }

    /// Values of every non-coordinate variable.
    pub fn parameters(&self) -> Environment {
        self.variables.values().filter(|v| !v.is_coordinate()).map(|v| (v.name.clone(), v.value)).collect()
    }

    /// Free names of a formula that are not coordinates.
    pub fn formula_parameters(&self, id: &str) -> BTreeSet<String> {
        self.formula(id)
            .and_then(|f| f.expr.as_ref())
            .map(|e| free_scalar_variables(e).into_iter().filter(|v| !COORDINATES.contains(&v.as_str())).collect())
            .unwrap_or_default()
    }

    /// Dependency edges, source to dependent.
    pub fn edges(&self) -> Vec<(NodeRef<'_>, NodeRef<'_>)> {
        let mut out = Vec::new();
        for f in &self.formulas {
            let Some(expr) = &f.expr else { continue };
            let free = free_scalar_variables(expr);
            for name in self.variables.keys().filter(|n| free.contains(*n)) {
                out.push((NodeRef::Variable(name), NodeRef::Formula(&f.id)));
            }
        }
        for p in &self.plots {
            out.extend(p.formulas.iter().map(|f| (NodeRef::Formula(f), NodeRef::Plot(&p.id))));
        }
        out.extend(self.hints.iter().map(|h| (NodeRef::Formula(&h.formula), NodeRef::Hint(&h.formula))));
        out.extend(self.examples.iter().map(|f| (NodeRef::Formula(f), NodeRef::Example(f))));
        if let Some(symbol) = &self.highlight {
            if let Some((name, _)) = self.variables.get_key_value(symbol) {
                out.push((NodeRef::Variable(name), NodeRef::Highlight));
            }
        }
        out
    }

    /// Kahn's algorithm over [`edges`](Self::edges).
    pub fn is_acyclic(&self) -> bool {
        let edges = self.edges();
        let mut indegree: BTreeMap<NodeRef, usize> = BTreeMap::new();
        for (a, b) in &edges {
            indegree.entry(*a).or_insert(0);
            *indegree.entry(*b).or_insert(0) += 1;
        }
        let mut queue: VecDeque<NodeRef> = indegree.iter().filter(|(_, d)| **d == 0).map(|(n, _)| *n).collect();
        let mut seen = 0;
        while let Some(n) = queue.pop_front() {
            seen += 1;
            for (_, b) in edges.iter().filter(|(a, _)| *a == n) {
                let d = indegree.get_mut(b).expect("node registered");
                *d -= 1;
                if *d == 0 {
                    queue.push_back(*b);
                }
            }
        }
        seen == indegree.len()
    }
}

/// The relation a plot draws for a formula: `y = f(x)` (the last part of a
/// chain), or the formula itself for circles.
pub fn plot_relation(expr: &Expr, env: &Environment) -> Option<Expr> {
    if let Some(f) = explicit_rhs(expr) {
        return Some(Expr::relation(Expr::var("y"), RelOp::Eq, f.clone()));
    }
    circle_params(expr, env).map(|_| expr.clone())
}

/// `lhs - rhs` of a plain relation.
pub fn residual_expr(rel: &Expr) -> Option<Expr> {
    match &rel.kind {
        ExprKind::Relation { lhs, rhs, .. } => Some(Expr::sub(lhs.as_ref().clone(), rhs.as_ref().clone())),
        _ => None,
    }
}

/// `a0` is accepted for `a₀`.
pub fn canonical_name(name: &str) -> String {
    let mut chars = name.chars();
    if chars.next() == Some('a') && name.len() > 1 && chars.clone().all(|c| c.is_ascii_digit()) {
        let digits: String = chars.map(|c| char::from_u32('₀' as u32 + c.to_digit(10).unwrap()).unwrap()).collect();
        format!("a{digits}")
    } else {
        name.to_string()
    }
}

pub fn promoted_name(index: usize) -> String {
    canonical_name(&format!("a{index}"))
}
