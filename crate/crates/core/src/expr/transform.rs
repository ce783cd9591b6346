use std::collections::BTreeSet;

use super::ast::{BinOp, Expr, ExprKind};

/// Replaces every free occurrence of `Variable(name)`. Summation indices
/// shadow: a bound index is never substituted inside its body. A negative
/// literal substituted as the right operand of `+`/`-` flips the operator.
pub fn substitute(e: &Expr, name: &str, replacement: &Expr) -> Expr {
    match &e.kind {
        ExprKind::Variable(v) if v == name => {
            let mut r = replacement.clone();
            if r.span.is_none() {
                r.span = e.span;
            }
            r
        }
        ExprKind::Literal(_) | ExprKind::Variable(_) => e.clone(),
        ExprKind::Summation { index, lower, upper, body } => {
            let body = if index == name { body.as_ref().clone() } else { substitute(body, name, replacement) };
            Expr {
                kind: ExprKind::Summation {
                    index: index.clone(),
                    lower: Box::new(substitute(lower, name, replacement)),
                    upper: Box::new(substitute(upper, name, replacement)),
                    body: Box::new(body),
                },
                span: e.span,
            }
        }
        ExprKind::Neg(inner) => Expr { kind: ExprKind::Neg(Box::new(substitute(inner, name, replacement))), span: e.span },
        ExprKind::Binary { op, lhs, rhs } => {
            let lhs = Box::new(substitute(lhs, name, replacement));
            let rhs_new = substitute(rhs, name, replacement);
            let substituted = matches!(&rhs.kind, ExprKind::Variable(v) if v == name);
            let (op, rhs) = match (&rhs_new.kind, op) {
                (ExprKind::Neg(inner), BinOp::Add | BinOp::Sub)
                    if substituted && matches!(inner.kind, ExprKind::Literal(_)) =>
                {
                    let flipped = if *op == BinOp::Add { BinOp::Sub } else { BinOp::Add };
                    (flipped, Expr { kind: inner.kind.clone(), span: rhs_new.span })
                }
                _ => (*op, rhs_new),
            };
            Expr { kind: ExprKind::Binary { op, lhs, rhs: Box::new(rhs) }, span: e.span }
        }
        ExprKind::Function { func, arg } => {
            Expr { kind: ExprKind::Function { func: *func, arg: Box::new(substitute(arg, name, replacement)) }, span: e.span }
        }
        ExprKind::Indexed { base, subscript } => Expr {
            kind: ExprKind::Indexed { base: base.clone(), subscript: Box::new(substitute(subscript, name, replacement)) },
            span: e.span,
        },
        ExprKind::Relation { lhs, op, rhs } => Expr {
            kind: ExprKind::Relation {
                lhs: Box::new(substitute(lhs, name, replacement)),
                op: *op,
                rhs: Box::new(substitute(rhs, name, replacement)),
            },
            span: e.span,
        },
        ExprKind::Chain(parts) => {
            Expr { kind: ExprKind::Chain(parts.iter().map(|p| substitute(p, name, replacement)).collect()), span: e.span }
        }
    }
}

/// Substitutes every binding of `env` that occurs free in `e`.
pub fn substitute_env(e: &Expr, env: &super::eval::Environment) -> Expr {
    let mut out = e.clone();
    for (name, value) in env.iter() {
        if let Some(lit) = Expr::from_f64(value) {
            out = substitute(&out, name, &lit);
        }
    }
    out
}

/// Unbound names, including the base names of indexed families (`a` for `a_i`).
pub fn free_variables(e: &Expr) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect(e, &mut Vec::new(), &mut out, true);
    out
}

/// Unbound scalar names only; indexed family bases are left out.
pub fn free_scalar_variables(e: &Expr) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect(e, &mut Vec::new(), &mut out, false);
    out
}

fn collect(e: &Expr, bound: &mut Vec<String>, out: &mut BTreeSet<String>, families: bool) {
    match &e.kind {
        ExprKind::Variable(v) => {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        }
        ExprKind::Indexed { base, subscript } => {
            if families && !bound.contains(base) {
                out.insert(base.clone());
            }
            collect(subscript, bound, out, families);
        }
        ExprKind::Summation { index, lower, upper, body } => {
            collect(lower, bound, out, families);
            collect(upper, bound, out, families);
            bound.push(index.clone());
            collect(body, bound, out, families);
            bound.pop();
        }
        _ => {
            for child in e.children() {
                collect(child, bound, out, families);
            }
        }
    }
}
