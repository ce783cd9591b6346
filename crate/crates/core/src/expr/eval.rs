use std::collections::BTreeMap;

use thiserror::Error;

use super::ast::{BinOp, Expr, ExprKind, Func};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("relations have no numeric value")]
    Relation,
}

/// Variable bindings. Values are always finite.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Environment {
    values: BTreeMap<String, f64>,
}

impl Environment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds `name`; non-finite values are ignored and reported as `false`.
    pub fn insert(&mut self, name: impl Into<String>, value: f64) -> bool {
        if !value.is_finite() {
            return false;
        }
        self.values.insert(name.into(), value);
        true
    }

    pub fn with(mut self, name: impl Into<String>, value: f64) -> Self {
        self.insert(name, value);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn remove(&mut self, name: &str) -> Option<f64> {
        self.values.remove(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl<S: Into<String>> FromIterator<(S, f64)> for Environment {
    fn from_iter<I: IntoIterator<Item = (S, f64)>>(iter: I) -> Self {
        let mut env = Environment::new();
        for (k, v) in iter {
            env.insert(k, v);
        }
        env
    }
}

struct Scope<'a> {
    env: &'a Environment,
    locals: Vec<(String, f64)>,
}

impl Scope<'_> {
    fn lookup(&self, name: &str) -> Result<f64, EvalError> {
        self.locals
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
            .or_else(|| self.env.get(name))
            .ok_or_else(|| EvalError::UnboundVariable(name.to_string()))
    }
}

fn finite(value: f64, what: &str) -> Result<f64, EvalError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(EvalError::DomainError(what.to_string()))
    }
}

fn as_integer(value: f64, what: &str) -> Result<i64, EvalError> {
    if value.fract() == 0.0 && value.abs() < 9.0e15 {
        Ok(value as i64)
    } else {
        Err(EvalError::DomainError(format!("{what} must be an integer, got {value}")))
    }
}

/// Evaluates to an IEEE double. Summations are evaluated by iterated addition.
pub fn evaluate(e: &Expr, env: &Environment) -> Result<f64, EvalError> {
    let mut scope = Scope { env, locals: Vec::new() };
    eval(e, &mut scope)
}

fn eval(e: &Expr, scope: &mut Scope<'_>) -> Result<f64, EvalError> {
    match &e.kind {
        ExprKind::Literal(n) => Ok(n.to_f64()),
        ExprKind::Variable(name) => scope.lookup(name),
        ExprKind::Indexed { base, subscript } => {
            let k = as_integer(eval(subscript, scope)?, "subscript")?;
            scope.lookup(&format!("{base}_{k}"))
        }
        ExprKind::Neg(inner) => Ok(-eval(inner, scope)?),
        ExprKind::Binary { op, lhs, rhs } => {
            let a = eval(lhs, scope)?;
            let b = eval(rhs, scope)?;
            match op {
                BinOp::Add => finite(a + b, "overflow"),
                BinOp::Sub => finite(a - b, "overflow"),
                BinOp::Mul => finite(a * b, "overflow"),
                BinOp::Div => {
                    if b == 0.0 {
                        Err(EvalError::DomainError("division by zero".into()))
                    } else {
                        finite(a / b, "overflow")
                    }
                }
                BinOp::Pow => {
                    let r = if b.fract() == 0.0 && b.abs() <= i32::MAX as f64 { a.powi(b as i32) } else { a.powf(b) };
                    finite(r, "undefined power")
                }
            }
        }
        ExprKind::Function { func, arg } => {
            let v = eval(arg, scope)?;
            match func {
                Func::Sqrt if v < 0.0 => Err(EvalError::DomainError("square root of a negative".into())),
                Func::Sqrt => Ok(v.sqrt()),
                Func::Sin => Ok(v.sin()),
                Func::Cos => Ok(v.cos()),
                Func::Tan => finite(v.tan(), "tangent pole"),
                Func::Ln if v <= 0.0 => Err(EvalError::DomainError("logarithm of a non-positive".into())),
                Func::Ln => Ok(v.ln()),
                Func::Abs => Ok(v.abs()),
            }
        }
        ExprKind::Summation { index, lower, upper, body } => {
            let lo = as_integer(eval(lower, scope)?, "summation bound")?;
            let hi = as_integer(eval(upper, scope)?, "summation bound")?;
            if lo > hi + 1 {
                return Err(EvalError::DomainError(format!("summation range {lo}..{hi} is reversed")));
            }
            let mut total = 0.0;
            for k in lo..=hi {
                scope.locals.push((index.clone(), k as f64));
                let term = eval(body, scope);
                scope.locals.pop();
                total += term?;
            }
            finite(total, "overflow")
        }
        ExprKind::Relation { .. } | ExprKind::Chain(_) => Err(EvalError::Relation),
    }
}

/// The sides of a relation: `(lhs, rhs)` pairs, one per `=` link of a chain.
pub fn relation_sides(e: &Expr) -> Option<Vec<(&Expr, super::ast::RelOp, &Expr)>> {
    match &e.kind {
        ExprKind::Relation { lhs, op, rhs } => Some(vec![(lhs.as_ref(), *op, rhs.as_ref())]),
        ExprKind::Chain(parts) => {
            Some(parts.windows(2).map(|w| (&w[0], super::ast::RelOp::Eq, &w[1])).collect())
        }
        _ => None,
    }
}

/// Whether a relation holds under `env`, equalities within `tol`.
pub fn relation_holds(e: &Expr, env: &Environment, tol: f64) -> Result<bool, EvalError> {
    let sides = relation_sides(e).ok_or(EvalError::Relation)?;
    for (lhs, op, rhs) in sides {
        if !op.holds(evaluate(lhs, env)?, evaluate(rhs, env)?, tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Largest `|lhs - rhs|` over the links of a relation.
pub fn relation_residual(e: &Expr, env: &Environment) -> Result<f64, EvalError> {
    let sides = relation_sides(e).ok_or(EvalError::Relation)?;
    let mut worst: f64 = 0.0;
    for (lhs, _, rhs) in sides {
        worst = worst.max((evaluate(lhs, env)? - evaluate(rhs, env)?).abs());
    }
    Ok(worst)
}
