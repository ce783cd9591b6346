use serde::Serialize;

use crate::expr::{evaluate, free_scalar_variables, substitute_env, Environment, Expr, ExprKind, Func, RelOp};

use super::poly::Poly;
use super::CasError;

pub const DEFAULT_SAMPLES: usize = 257;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polyline {
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Explicit,
    Circle,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveSample {
    pub kind: CurveKind,
    pub segments: Vec<Polyline>,
}

/// A grid of power-of-two spacing anchored at 0 covering `[lo, hi]`: returns
/// `(first, step, count)` with step the largest `2^k <= (hi - lo) / 256`.
pub fn dyadic_grid(lo: f64, hi: f64) -> (f64, f64, usize) {
    let span = (hi - lo).abs().max(f64::MIN_POSITIVE);
    let step = 2f64.powi((span / 256.0).log2().floor() as i32);
    let first = (lo.min(hi) / step).ceil() * step;
    let count = ((lo.max(hi) - first) / step).floor() as usize + 1;
    (first, step, count)
}

/// The side giving `y` explicitly, if the relation is `y = f(x)` (either
/// orientation, or a chain that starts or ends with `y`).
pub(crate) fn explicit_rhs(rel: &Expr) -> Option<&Expr> {
    let is_y = |e: &Expr| matches!(&e.kind, ExprKind::Variable(v) if v == "y");
    let no_y = |e: &Expr| !free_scalar_variables(e).contains("y");
    match &rel.kind {
        ExprKind::Relation { lhs, op: RelOp::Eq, rhs } => {
            if is_y(lhs) && no_y(rhs) {
                Some(rhs)
            } else if is_y(rhs) && no_y(lhs) {
                Some(lhs)
            } else {
                None
            }
        }
        ExprKind::Chain(parts) => {
            let (first, last) = (parts.first()?, parts.last()?);
            if is_y(first) {
                parts[1..].iter().rev().find(|p| no_y(p))
            } else if is_y(last) {
                parts[..parts.len() - 1].iter().find(|p| no_y(p))
            } else {
                None
            }
        }
        _ => None,
    }
}

/// `(h, k, r)` for relations equivalent to `(x-h)^2 + (y-k)^2 = r^2`,
/// including the `\sqrt{...} = r` form.
pub(crate) fn circle_params(rel: &Expr, env: &Environment) -> Option<(f64, f64, f64)> {
    let ExprKind::Relation { lhs, op: RelOp::Eq, rhs } = &rel.kind else {
        return None;
    };
    let mut bound = env.clone();
    bound.remove("x");
    bound.remove("y");
    let unroot = |side: &Expr, other: &Expr| match &side.kind {
        ExprKind::Function { func: Func::Sqrt, arg } => Some((arg.as_ref().clone(), other.clone())),
        _ => None,
    };
    let (l, r) = match unroot(lhs, rhs).or_else(|| unroot(rhs, lhs)) {
        Some((radicand, radius)) => {
            // a square root never equals a negative radius
            if evaluate(&radius, &bound).ok()? < 0.0 {
                return None;
            }
            (radicand, Expr::pow(radius, Expr::integer(2)))
        }
        None => (lhs.as_ref().clone(), rhs.as_ref().clone()),
    };
    let diff = substitute_env(&Expr::sub(l, r), &bound);
    let vars = vec!["x".to_string(), "y".to_string()];
    let p = Poly::from_expr(&diff, &vars)?;
    if p.total_degree() != 2 {
        return None;
    }
    let c = p.coeff(&[2, 0]);
    if c.is_zero() || p.coeff(&[0, 2]) != c || !p.coeff(&[1, 1]).is_zero() {
        return None;
    }
    let c = c.to_f64();
    let h = -p.coeff(&[1, 0]).to_f64() / (2.0 * c);
    let k = -p.coeff(&[0, 1]).to_f64() / (2.0 * c);
    let r2 = h * h + k * k - p.coeff(&[0, 0]).to_f64() / c;
    (r2 > 0.0 && r2.is_finite()).then(|| (h, k, r2.sqrt()))
}

/// Samples `y = f(x)` on `n` evenly spaced abscissae in `x_range`, or a
/// recognized circle at `n` parametric points.
pub fn sample_curve(rel: &Expr, env: &Environment, x_range: (f64, f64), n: usize) -> Result<CurveSample, CasError> {
    let n = n.max(2);
    if let Some(f) = explicit_rhs(rel) {
        let (lo, hi) = x_range;
        let xs: Vec<f64> = (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect();
        return Ok(CurveSample { kind: CurveKind::Explicit, segments: sample_explicit(f, env, &xs) });
    }
    if let Some((h, k, r)) = circle_params(rel, env) {
        let points = (0..n)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n as f64;
                (h + r * t.cos(), k + r * t.sin())
            })
            .collect();
        return Ok(CurveSample { kind: CurveKind::Circle, segments: vec![Polyline { points, closed: true }] });
    }
    Err(CasError::NotPlottable)
}

/// Samples an explicit curve at the given abscissae (strictly increasing).
pub(crate) fn sample_explicit(f: &Expr, env: &Environment, xs: &[f64]) -> Vec<Polyline> {
    let mut scope = env.clone();
    let mut at = |x: f64| {
        scope.insert("x", x);
        evaluate(f, &scope).ok().filter(|v| v.is_finite())
    };
    let mut segments = Vec::new();
    let mut current: Vec<(f64, f64)> = Vec::new();
    for &x in xs {
        match at(x) {
            Some(y) => {
                if let Some(&(px, py)) = current.last() {
                    if pole_between(&mut at, (px, py), (x, y)) {
                        segments.push(std::mem::take(&mut current));
                    }
                }
                current.push((x, y));
            }
            None => segments.push(std::mem::take(&mut current)),
        }
    }
    segments.push(current);
    segments.into_iter().filter(|s| s.len() >= 2).map(|points| Polyline { points, closed: false }).collect()
}

/// A sign change whose bracketing values grow under bisection is a pole,
/// not a crossing.
fn pole_between(at: &mut impl FnMut(f64) -> Option<f64>, a: (f64, f64), b: (f64, f64)) -> bool {
    if a.1.signum() == b.1.signum() || a.1 == 0.0 || b.1 == 0.0 {
        return false;
    }
    let start = a.1.abs() + b.1.abs();
    let (mut lo, mut hi) = (a, b);
    for _ in 0..60 {
        let mid = lo.0 + (hi.0 - lo.0) / 2.0;
        if mid <= lo.0 || mid >= hi.0 {
            break;
        }
        let Some(v) = at(mid) else { return true };
        if v == 0.0 {
            return false;
        }
        if v.signum() == lo.1.signum() {
            lo = (mid, v);
        } else {
            hi = (mid, v);
        }
    }
    lo.1.abs() + hi.1.abs() > start
}
