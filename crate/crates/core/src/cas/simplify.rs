use crate::expr::{free_scalar_variables, BinOp, Expr, ExprKind, Func, Number};

use super::poly::Poly;

/// Constant folding, identity removal, and like-term collection for
/// polynomials in a single variable. Returns the input unchanged when no
/// rule applies.
pub fn simplify(e: &Expr) -> Expr {
    match &e.kind {
        ExprKind::Relation { lhs, op, rhs } => Expr::relation(simplify(lhs), *op, simplify(rhs)),
        ExprKind::Chain(parts) => Expr::chain(parts.iter().map(simplify).collect()),
        _ => {
            let local = e.map_bottom_up(&mut fold_node);
            collect_like_terms(&local).unwrap_or(local)
        }
    }
}

fn collect_like_terms(e: &Expr) -> Option<Expr> {
    let vars: Vec<String> = free_scalar_variables(e).into_iter().collect();
    if vars.len() > 1 || contains_non_polynomial(e) {
        return None;
    }
    let poly = Poly::from_expr(e, &vars)?;
    let candidate = poly.to_expr();
    let cost = |x: &Expr| (additive_terms(x), x.node_count());
    (cost(&candidate) < cost(e)).then_some(candidate)
}

fn contains_non_polynomial(e: &Expr) -> bool {
    let mut found = false;
    e.visit(&mut |n| {
        if matches!(n.kind, ExprKind::Function { .. } | ExprKind::Summation { .. } | ExprKind::Indexed { .. }) {
            found = true;
        }
    });
    found
}

fn additive_terms(e: &Expr) -> usize {
    match &e.kind {
        ExprKind::Binary { op: BinOp::Add | BinOp::Sub, lhs, rhs } => additive_terms(lhs) + additive_terms(rhs),
        _ => 1,
    }
}

fn fold_node(node: Expr) -> Expr {
    let span = node.span;
    let folded = match &node.kind {
        ExprKind::Neg(inner) => match &inner.kind {
            ExprKind::Neg(x) => Some(x.as_ref().clone()),
            _ => None,
        },
        ExprKind::Binary { op, lhs, rhs } => fold_binary(*op, lhs, rhs),
        ExprKind::Function { func, arg } => {
            let c = arg.as_constant();
            match (func, c) {
                (Func::Abs, Some(c)) => Some(Expr::number(c.abs())),
                (Func::Sqrt, Some(c)) => c.exact_sqrt().map(Expr::number),
                _ => None,
            }
        }
        _ => None,
    };
    match folded {
        Some(mut e) => {
            if e.span.is_none() {
                e.span = span;
            }
            e
        }
        None => node,
    }
}

fn fold_binary(op: BinOp, lhs: &Expr, rhs: &Expr) -> Option<Expr> {
    let a = lhs.as_constant();
    let b = rhs.as_constant();
    if let (Some(a), Some(b)) = (&a, &b) {
        let value = match op {
            BinOp::Add => Some(a + b),
            BinOp::Sub => Some(a - b),
            BinOp::Mul => Some(a * b),
            BinOp::Div => (!b.is_zero()).then(|| a / b),
            BinOp::Pow => b.to_i64().filter(|k| k.abs() <= 64).and_then(|k| a.powi(k)),
        };
        if let Some(v) = value {
            if op != BinOp::Div || v.to_decimal_string().is_some() {
                return Some(Expr::number(v));
            }
        }
        return None;
    }
    let is = |c: &Option<Number>, k: i64| c.as_ref().is_some_and(|c| *c == Number::from_integer(k));
    match op {
        BinOp::Add if is(&b, 0) => Some(lhs.clone()),
        BinOp::Add if is(&a, 0) => Some(rhs.clone()),
        BinOp::Sub if is(&b, 0) => Some(lhs.clone()),
        BinOp::Sub if is(&a, 0) => Some(Expr::neg(rhs.clone())),
        BinOp::Mul if is(&b, 1) => Some(lhs.clone()),
        BinOp::Mul if is(&a, 1) => Some(rhs.clone()),
        BinOp::Div if is(&b, 1) => Some(lhs.clone()),
        BinOp::Pow if is(&b, 1) => Some(lhs.clone()),
        _ => None,
    }
}
