use crate::expr::{evaluate, render_latex, substitute, BinOp, Environment, EvalError, Expr, ExprKind, Func, Number};

use super::simplify::simplify;
use super::CasError;

/// Expansions with more terms than this show `first + second + ⋯ + last`.
pub const ELLIPSIS_THRESHOLD: u64 = 6;

const MAX_EXACT_TERMS: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ExampleExpansion {
    pub source: Expr,
    /// LaTeX of each displayed term, in order; the ellipsis is not a term.
    pub terms: Vec<String>,
    pub ellipsis: bool,
    /// Plain form, e.g. `1 + 2 + ⋯ + 20` or `a_1 + a_2 + ⋯ + a_n`.
    pub text: String,
    /// LaTeX form, e.g. `1 + 2 + \cdots + 20`.
    pub latex: String,
    /// Number of terms for concrete bounds.
    pub term_count: Option<u64>,
    /// Exact sum when every term has a rational value.
    pub value: Option<Number>,
}

/// Exact rational value of `e`, or `None` when some part is unbound or not
/// rational (square roots of non-squares, trigonometry, ...).
pub fn exact_value(e: &Expr, env: &Environment) -> Option<Number> {
    match &e.kind {
        ExprKind::Literal(n) => Some(n.clone()),
        ExprKind::Variable(name) => Number::from_f64(env.get(name)?),
        ExprKind::Indexed { base, subscript } => {
            let k = exact_value(subscript, env)?.to_i64()?;
            Number::from_f64(env.get(&format!("{base}_{k}"))?)
        }
        ExprKind::Neg(inner) => Some(-exact_value(inner, env)?),
        ExprKind::Binary { op, lhs, rhs } => {
            let a = exact_value(lhs, env)?;
            let b = exact_value(rhs, env)?;
            match op {
                BinOp::Add => Some(&a + &b),
                BinOp::Sub => Some(&a - &b),
                BinOp::Mul => Some(&a * &b),
                BinOp::Div => (!b.is_zero()).then(|| &a / &b),
                BinOp::Pow => a.powi(b.to_i64().filter(|k| k.abs() <= 64)?),
            }
        }
        ExprKind::Function { func: Func::Abs, arg } => Some(exact_value(arg, env)?.abs()),
        ExprKind::Function { func: Func::Sqrt, arg } => exact_value(arg, env)?.exact_sqrt(),
        ExprKind::Function { .. } => None,
        ExprKind::Summation { index, lower, upper, body } => {
            let lo = exact_value(lower, env)?.to_i64()?;
            let hi = exact_value(upper, env)?.to_i64()?;
            if hi < lo || (hi - lo) as u64 >= MAX_EXACT_TERMS {
                return (hi < lo).then(Number::zero);
            }
            let mut total = Number::zero();
            for k in lo..=hi {
                total = &total + &exact_value(&substitute(body, index, &Expr::integer(k)), env)?;
            }
            Some(total)
        }
        ExprKind::Relation { .. } | ExprKind::Chain(_) => None,
    }
}

enum Bound {
    Concrete(i64),
    Symbolic(Expr),
}

fn bound(e: &Expr, env: &Environment, allow_symbolic: bool) -> Result<Bound, CasError> {
    if let Some(v) = exact_value(e, env) {
        return v.to_i64().map(Bound::Concrete).ok_or_else(|| CasError::NonIntegerBound(render_latex(e)));
    }
    match evaluate(e, env) {
        Err(EvalError::UnboundVariable(_)) if allow_symbolic => Ok(Bound::Symbolic(e.clone())),
        _ => Err(CasError::NonIntegerBound(render_latex(e))),
    }
}

fn term(body: &Expr, index: &str, at: &Expr, env: &Environment) -> (String, Option<Number>) {
    let instance = substitute(body, index, at);
    match exact_value(&instance, env) {
        Some(v) => (render_latex(&Expr::number(v.clone())), Some(v)),
        None => (render_latex(&simplify(&instance)), None),
    }
}

/// Renders a concrete example of a summation per the ellipsis rule.
pub fn expand_summation(s: &Expr, env: &Environment) -> Result<ExampleExpansion, CasError> {
    let ExprKind::Summation { index, lower, upper, body } = &s.kind else {
        return Err(CasError::NotSummation);
    };
    let Bound::Concrete(lo) = bound(lower, env, false)? else {
        unreachable!("lower bound is concrete")
    };
    let (terms, ellipsis, term_count, value) = match bound(upper, env, true)? {
        Bound::Symbolic(upper) => {
            let first = term(body, index, &Expr::integer(lo), env).0;
            let second = term(body, index, &Expr::integer(lo + 1), env).0;
            let last = term(body, index, &upper, env).0;
            (vec![first, second, last], true, None, None)
        }
        Bound::Concrete(hi) => {
            let count = if hi < lo { 0 } else { (hi - lo + 1) as u64 };
            let value = if count <= MAX_EXACT_TERMS {
                let mut total = Some(Number::zero());
                for k in lo..=hi {
                    let v = term(body, index, &Expr::integer(k), env).1;
                    total = total.zip(v).map(|(t, v)| &t + &v);
                    if total.is_none() {
                        break;
                    }
                }
                total
            } else {
                None
            };
            let shown: Vec<i64> = if count <= ELLIPSIS_THRESHOLD { (lo..=hi).collect() } else { vec![lo, lo + 1, hi] };
            let terms = shown.iter().map(|&k| term(body, index, &Expr::integer(k), env).0).collect();
            (terms, count > ELLIPSIS_THRESHOLD, Some(count), value)
        }
    };
    let latex = join(&terms, ellipsis, "\\cdots");
    let text = compact(&join(&terms, ellipsis, "⋯"));
    Ok(ExampleExpansion { source: s.clone(), terms, ellipsis, text, latex, term_count, value })
}

fn join(terms: &[String], ellipsis: bool, dots: &str) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    let wrap = |t: &String| if t.starts_with('-') { format!("({t})") } else { t.clone() };
    let mut parts: Vec<String> = terms.iter().map(wrap).collect();
    if ellipsis {
        parts.insert(parts.len() - 1, dots.to_string());
    }
    parts.join(" + ")
}

/// Drops braces around simple scripts: `a_{1}` becomes `a_1`.
fn compact(latex: &str) -> String {
    let mut out = String::new();
    let mut rest = latex;
    while let Some(pos) = rest.find(['_', '^']) {
        out.push_str(&rest[..=pos]);
        rest = &rest[pos + 1..];
        if let Some(inner) = rest.strip_prefix('{') {
            if let Some(end) = inner.find('}') {
                let body = &inner[..end];
                if !body.is_empty() && body.chars().all(|c| c.is_alphanumeric()) {
                    out.push_str(body);
                    rest = &inner[end + 1..];
                }
            }
        }
    }
    out.push_str(rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_latex;

    fn expand(src: &str) -> ExampleExpansion {
        expand_summation(&parse_latex(src).unwrap(), &Environment::new()).unwrap()
    }

    #[test]
    fn long_concrete_sum_uses_ellipsis() {
        let e = expand(r"\sum_{i=1}^{20} i");
        assert_eq!(e.text, "1 + 2 + ⋯ + 20");
        assert_eq!(e.latex, r"1 + 2 + \cdots + 20");
        assert_eq!(e.value, Some(Number::from_integer(210)));
        assert_eq!(e.term_count, Some(20));
    }

    #[test]
    fn symbolic_family() {
        let e = expand(r"\sum_{i=1}^{n} a_i");
        assert_eq!(e.text, "a_1 + a_2 + ⋯ + a_n");
        assert_eq!(e.latex, r"a_{1} + a_{2} + \cdots + a_{n}");
        assert_eq!(e.value, None);
    }

    #[test]
    fn short_sum_is_full() {
        let e = expand(r"\sum_{i=1}^{3} i^2");
        assert_eq!(e.text, "1 + 4 + 9");
        assert!(!e.ellipsis);
        assert_eq!(e.value, Some(Number::from_integer(14)));
    }

    #[test]
    fn bound_errors() {
        let env = Environment::new();
        let err = expand_summation(&parse_latex(r"\sum_{i=1}^{2.5} i").unwrap(), &env);
        assert!(matches!(err, Err(CasError::NonIntegerBound(_))));
        let err = expand_summation(&parse_latex(r"\sum_{i=k}^{3} i").unwrap(), &env);
        assert!(matches!(err, Err(CasError::NonIntegerBound(_))));
        assert_eq!(expand_summation(&parse_latex("x").unwrap(), &env), Err(CasError::NotSummation));
    }

    #[test]
    fn env_supplies_bounds() {
        let env = Environment::new().with("n", 4.0);
        let e = expand_summation(&parse_latex(r"\sum_{i=1}^{n} 2i").unwrap(), &env).unwrap();
        assert_eq!(e.text, "2 + 4 + 6 + 8");
        assert_eq!(e.value, Some(Number::from_integer(20)));
    }
}
