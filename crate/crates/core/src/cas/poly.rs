//! Exact polynomials over a fixed, ordered variable list.

use std::collections::BTreeMap;

use crate::expr::{BinOp, Expr, ExprKind, Number};

const MAX_DEGREE: u32 = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    vars: Vec<String>,
    /// exponent vector (one entry per var) -> nonzero coefficient
    terms: BTreeMap<Vec<u32>, Number>,
}

impl Poly {
    pub fn constant(vars: &[String], value: Number) -> Self {
        let mut terms = BTreeMap::new();
        if !value.is_zero() {
            terms.insert(vec![0; vars.len()], value);
        }
        Poly { vars: vars.to_vec(), terms }
    }

    pub fn zero(vars: &[String]) -> Self {
        Poly { vars: vars.to_vec(), terms: BTreeMap::new() }
    }

    fn variable(vars: &[String], index: usize) -> Self {
        let mut exps = vec![0; vars.len()];
        exps[index] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(exps, Number::one());
        Poly { vars: vars.to_vec(), terms }
    }

    /// Reads `e` as a polynomial in `vars`; `None` when it uses anything
    /// else (other names, functions, division by a non-constant, ...).
    pub fn from_expr(e: &Expr, vars: &[String]) -> Option<Poly> {
        match &e.kind {
            ExprKind::Literal(n) => Some(Poly::constant(vars, n.clone())),
            ExprKind::Variable(name) => vars.iter().position(|v| v == name).map(|i| Poly::variable(vars, i)),
            ExprKind::Neg(inner) => Some(Poly::from_expr(inner, vars)?.scale(&-Number::one())),
            ExprKind::Binary { op, lhs, rhs } => {
                let a = Poly::from_expr(lhs, vars)?;
                let b = Poly::from_expr(rhs, vars)?;
                match op {
                    BinOp::Add => Some(a.add(&b)),
                    BinOp::Sub => Some(a.sub(&b)),
                    BinOp::Mul => {
                        let product = a.mul(&b);
                        (product.total_degree() <= MAX_DEGREE).then_some(product)
                    }
                    BinOp::Div => {
                        let divisor = b.as_constant()?;
                        Some(a.scale(&Number::one().div_checked(&divisor)?))
                    }
                    BinOp::Pow => {
                        let k = b.as_constant()?.to_i64()?;
                        if !(0..=MAX_DEGREE as i64).contains(&k) {
                            return None;
                        }
                        if a.total_degree() * k as u32 > MAX_DEGREE {
                            return None;
                        }
                        let mut out = Poly::constant(vars, Number::one());
                        for _ in 0..k {
                            out = out.mul(&a);
                        }
                        Some(out)
                    }
                }
            }
            _ => None,
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Number> {
        match self.terms.len() {
            0 => Some(Number::zero()),
            1 => {
                let (exps, c) = self.terms.iter().next()?;
                exps.iter().all(|&e| e == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Degree in the first variable, for univariate use.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.first().copied().unwrap_or(0)).max().unwrap_or(0)
    }

    pub fn coeff(&self, exps: &[u32]) -> Number {
        self.terms.get(exps).cloned().unwrap_or_else(Number::zero)
    }

    /// Coefficient of `var^k` in a univariate polynomial.
    pub fn coeff1(&self, k: u32) -> Number {
        self.coeff(&[k])
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Number)> {
        self.terms.iter()
    }

    fn insert(&mut self, exps: Vec<u32>, value: Number) {
        let sum = match self.terms.get(&exps) {
            Some(existing) => existing + &value,
            None => value,
        };
        if sum.is_zero() {
            self.terms.remove(&exps);
        } else {
            self.terms.insert(exps, sum);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (exps, c) in &other.terms {
            out.insert(exps.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(&-Number::one()))
    }

    pub fn scale(&self, k: &Number) -> Poly {
        let mut out = Poly::zero(&self.vars);
        if k.is_zero() {
            return out;
        }
        for (exps, c) in &self.terms {
            out.terms.insert(exps.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(&self.vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.insert(exps, ca * cb);
            }
        }
        out
    }

    /// Terms of univariate degree `>= k`.
    pub fn high_part(&self, k: u32) -> Poly {
        let mut out = Poly::zero(&self.vars);
        for (exps, c) in &self.terms {
            if exps[0] >= k {
                out.terms.insert(exps.clone(), c.clone());
            }
        }
        out
    }

    /// Canonical expression: terms by descending degree, leading sign as a
    /// negation, later negative terms as subtraction.
    pub fn to_expr(&self) -> Expr {
        let mut ordered: Vec<(&Vec<u32>, &Number)> = self.terms.iter().collect();
        ordered.sort_by(|(ea, _), (eb, _)| {
            let da: u32 = ea.iter().sum();
            let db: u32 = eb.iter().sum();
            db.cmp(&da).then_with(|| eb.cmp(ea))
        });
        let mut out: Option<Expr> = None;
        for (exps, c) in ordered {
            let magnitude = monomial(&self.vars, exps, &c.abs());
            out = Some(match out {
                None if c.is_negative() && exps.iter().any(|&e| e > 0) && !(-c).is_one() => monomial(&self.vars, exps, c),
                None if c.is_negative() => Expr::neg(magnitude),
                None => magnitude,
                Some(acc) if c.is_negative() => Expr::sub(acc, magnitude),
                Some(acc) => Expr::add(acc, magnitude),
            });
        }
        out.unwrap_or_else(|| Expr::integer(0))
    }
}

fn monomial(vars: &[String], exps: &[u32], coeff: &Number) -> Expr {
    let mut factors: Vec<Expr> = Vec::new();
    for (name, &k) in vars.iter().zip(exps) {
        match k {
            0 => {}
            1 => factors.push(Expr::var(name.clone())),
            _ => factors.push(Expr::pow(Expr::var(name.clone()), Expr::integer(k as i64))),
        }
    }
    let coeff_expr = || match coeff.to_decimal_string() {
        Some(_) => Expr::number(coeff.clone()),
        None => Expr::div(
            Expr::number(Number::from_big_integer(coeff.numer().clone())),
            Expr::number(Number::from_big_integer(coeff.denom().clone())),
        ),
    };
    let mut product = if factors.is_empty() || !coeff.is_one() { Some(coeff_expr()) } else { None };
    for f in factors {
        product = Some(match product {
            None => f,
            Some(acc) => Expr::mul(acc, f),
        });
    }
    product.expect("monomial has a factor")
}

trait CheckedDiv {
    fn div_checked(&self, other: &Number) -> Option<Number>;
}

impl CheckedDiv for Number {
    fn div_checked(&self, other: &Number) -> Option<Number> {
        (!other.is_zero()).then(|| self / other)
    }
}
