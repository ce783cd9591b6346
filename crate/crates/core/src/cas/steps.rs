//! Step-by-step solution traces for linear relations and quadratic
//! equations, in exact rational arithmetic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::expr::{free_variables, render_latex, Expr, ExprKind, Func, Number, RelOp};

use super::poly::Poly;
use super::CasError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rule {
    Given,
    CombineLikeTerms,
    AddBothSides,
    SubtractBothSides,
    MultiplyBothSides,
    DivideBothSides,
    Factor,
    ZeroProduct,
    QuadraticFormula,
    Solution,
}

/// One line of a derivation. `relations` is a disjunction (a single entry
/// except after a zero-product split); an empty list means no solution.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub relations: Vec<Expr>,
    pub rule: Rule,
    pub operand: Option<Expr>,
    pub narration: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Root {
    pub expr: Expr,
    pub value: f64,
    pub exact: Option<Number>,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolutionSet {
    /// `target op value` (op is `=` for equations).
    Bound { op: RelOp, value: Number },
    Roots(Vec<Root>),
    NoRealSolution { discriminant: Number },
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepTrace {
    pub target: String,
    pub steps: Vec<Step>,
    pub solution: SolutionSet,
}

fn num_expr(n: &Number) -> Expr {
    match n.to_decimal_string() {
        Some(_) => Expr::number(n.clone()),
        None => Expr::div(
            Expr::number(Number::from_big_integer(n.numer().clone())),
            Expr::number(Number::from_big_integer(n.denom().clone())),
        ),
    }
}

fn decimal_approx(n: &Number) -> String {
    match n.to_decimal_string() {
        Some(text) => text,
        None => format!("{:.10}…", n.to_f64()),
    }
}

fn sides(rel: &Expr) -> Result<(&Expr, RelOp, &Expr), CasError> {
    match &rel.kind {
        ExprKind::Relation { lhs, op, rhs } => Ok((lhs, *op, rhs)),
        _ => Err(CasError::NotARelation),
    }
}

struct Builder {
    target: String,
    vars: Vec<String>,
    steps: Vec<Step>,
}

impl Builder {
    fn push(&mut self, relations: Vec<Expr>, rule: Rule, operand: Option<Expr>, narration: String) {
        self.steps.push(Step { relations, rule, operand, narration });
    }

    fn rel(&self, lhs: &Poly, op: RelOp, rhs: &Poly) -> Expr {
        Expr::relation(lhs.to_expr(), op, rhs.to_expr())
    }

    fn term(&self, coeff: &Number) -> Poly {
        let t = Poly::from_expr(&Expr::var(self.target.clone()), &self.vars).expect("target is a var");
        t.scale(coeff)
    }
}

fn side_polys(rel: &Expr, target: &str) -> Result<(Poly, RelOp, Poly, Vec<String>), CasError> {
    let (lhs, op, rhs) = sides(rel)?;
    if !free_variables(rel).contains(target) {
        return Err(CasError::TargetAbsent(target.to_string()));
    }
    let vars = vec![target.to_string()];
    let l = Poly::from_expr(lhs, &vars);
    let r = Poly::from_expr(rhs, &vars);
    match (l, r) {
        (Some(l), Some(r)) => Ok((l, op, r, vars)),
        _ => Err(CasError::NotPolynomial(target.to_string())),
    }
}

/// Isolates `target` in a relation that is degree one in it.
pub fn solve_linear_steps(rel: &Expr, target: &str) -> Result<StepTrace, CasError> {
    let (mut l, mut op, mut r, vars) = side_polys(rel, target).map_err(|e| match e {
        CasError::NotPolynomial(t) => CasError::NotLinear(t),
        other => other,
    })?;
    if l.sub(&r).degree() != 1 {
        return Err(CasError::NotLinear(target.to_string()));
    }
    let mut b = Builder { target: target.to_string(), vars, steps: Vec::new() };
    b.push(vec![rel.clone()], Rule::Given, None, format!("Solve for {target}"));

    // Higher-degree terms cancel between the sides; drop them first.
    let high = r.high_part(2);
    if !high.is_zero() {
        l = l.sub(&high);
        r = r.sub(&high);
        b.push(vec![b.rel(&l, op, &r)], Rule::SubtractBothSides, Some(high.to_expr()), format!(
            "Subtract {} from both sides",
            render_latex(&high.to_expr())
        ));
    }

    let solved_already = l.coeff1(1).is_one() && l.coeff1(0).is_zero() && r.degree() == 0;
    let canonical = b.rel(&l, op, &r);
    let current = b.steps.last().expect("given").relations[0].clone();
    if canonical != current && !solved_already {
        b.push(vec![canonical], Rule::CombineLikeTerms, None, "Combine like terms".to_string());
    }

    let rc = r.coeff1(1);
    if !rc.is_zero() {
        let moved = b.term(&rc);
        l = l.sub(&moved);
        r = r.sub(&moved);
        let (rule, shown, verb) = if rc.is_negative() {
            (Rule::AddBothSides, b.term(&rc.abs()).to_expr(), "Add")
        } else {
            (Rule::SubtractBothSides, moved.to_expr(), "Subtract")
        };
        let text = render_latex(&shown);
        let prep = if rule == Rule::AddBothSides { "to" } else { "from" };
        b.push(vec![b.rel(&l, op, &r)], rule, Some(shown), format!("{verb} {text} {prep} both sides"));
    }

    let lc = l.coeff1(0);
    if !lc.is_zero() {
        let constant = Poly::constant(&b.vars, lc.clone());
        l = l.sub(&constant);
        r = r.sub(&constant);
        let (rule, shown, text) = if lc.is_negative() {
            let e = num_expr(&lc.abs());
            (Rule::AddBothSides, e.clone(), format!("Add {} to both sides", render_latex(&e)))
        } else {
            let e = num_expr(&lc);
            (Rule::SubtractBothSides, e.clone(), format!("Subtract {} from both sides", render_latex(&e)))
        };
        b.push(vec![b.rel(&l, op, &r)], rule, Some(shown), text);
    }

    let a = l.coeff1(1);
    let c = r.coeff1(0);
    let value = &c / &a;
    let lhs_var = Expr::var(target.to_string());
    if !a.is_one() {
        if a.is_negative() {
            op = op.flipped();
        }
        let rhs = if value.to_decimal_string().is_some() { num_expr(&value) } else { Expr::div(num_expr(&c), num_expr(&a)) };
        let mut text = format!("Divide both sides by {}", render_latex(&num_expr(&a)));
        if a.is_negative() && op != RelOp::Eq {
            text.push_str(" and reverse the inequality");
        }
        b.push(vec![Expr::relation(lhs_var.clone(), op, rhs)], Rule::DivideBothSides, Some(num_expr(&a)), text);
    }

    let final_rel = match b.steps.last() {
        Some(step) if step.rule == Rule::DivideBothSides => step.relations[0].clone(),
        _ => Expr::relation(lhs_var, op, num_expr(&value)),
    };
    let narration = match value.to_decimal_string() {
        Some(_) => render_latex(&final_rel),
        None => format!("{} ≈ {}", render_latex(&final_rel), decimal_approx(&value)),
    };
    b.push(vec![final_rel], Rule::Solution, None, narration);
    Ok(StepTrace { target: target.to_string(), steps: b.steps, solution: SolutionSet::Bound { op, value } })
}

fn lcm_of_denominators(p: &Poly) -> BigInt {
    p.terms().fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()))
}

fn gcd_of_numerators(p: &Poly) -> BigInt {
    p.terms().fold(BigInt::zero(), |acc, (_, c)| acc.gcd(c.numer()))
}

/// `q·x − p` for the root `p/q`.
fn linear_factor(target: &str, root: &Number) -> Expr {
    let q = Number::from_big_integer(root.denom().clone());
    let p = Number::from_big_integer(root.numer().clone());
    let x = Expr::var(target.to_string());
    let qx = if q.is_one() { x } else { Expr::mul(Expr::number(q), x) };
    if p.is_zero() {
        qx
    } else if p.is_negative() {
        Expr::add(qx, Expr::number(p.abs()))
    } else {
        Expr::sub(qx, Expr::number(p))
    }
}

/// Factors (or applies the quadratic formula to) `quadratic = 0`.
pub fn factor_quadratic_steps(rel: &Expr, target: &str) -> Result<StepTrace, CasError> {
    let (l, op, r, vars) = side_polys(rel, target).map_err(|e| match e {
        CasError::NotPolynomial(t) => CasError::NotQuadratic(t),
        other => other,
    })?;
    let mut p = l.sub(&r);
    if op != RelOp::Eq || p.degree() != 2 {
        return Err(CasError::NotQuadratic(target.to_string()));
    }
    let mut b = Builder { target: target.to_string(), vars: vars.clone(), steps: Vec::new() };
    b.push(vec![rel.clone()], Rule::Given, None, format!("Solve for {target}"));
    let zero = Poly::zero(&vars);
    if !r.is_zero() {
        b.push(vec![b.rel(&p, RelOp::Eq, &zero)], Rule::SubtractBothSides, Some(r.to_expr()), format!(
            "Subtract {} from both sides",
            render_latex(&r.to_expr())
        ));
    } else if b.rel(&p, RelOp::Eq, &zero) != *rel {
        b.push(vec![b.rel(&p, RelOp::Eq, &zero)], Rule::CombineLikeTerms, None, "Combine like terms".to_string());
    }

    // Scale to coprime integer coefficients with a positive leading term.
    let mut scale = Number::from_big_integer(lcm_of_denominators(&p));
    let g = gcd_of_numerators(&p.scale(&scale));
    scale = &scale / &Number::from_big_integer(g);
    if p.coeff1(2).is_negative() {
        scale = -scale;
    }
    if !scale.is_one() {
        p = p.scale(&scale);
        let (rule, shown) = if scale.denom().is_one() {
            (Rule::MultiplyBothSides, scale.clone())
        } else {
            (Rule::DivideBothSides, scale.recip().expect("nonzero"))
        };
        let verb = if rule == Rule::MultiplyBothSides { "Multiply" } else { "Divide" };
        b.push(vec![b.rel(&p, RelOp::Eq, &zero)], rule, Some(num_expr(&shown)), format!(
            "{verb} both sides by {}",
            render_latex(&num_expr(&shown))
        ));
    }

    let (a, bb, c) = (p.coeff1(2), p.coeff1(1), p.coeff1(0));
    let four = Number::from_integer(4);
    let disc = &(&bb * &bb) - &(&four * &(&a * &c));
    let x = Expr::var(target.to_string());

    if disc.is_negative() {
        b.push(
            vec![b.rel(&p, RelOp::Eq, &zero)],
            Rule::QuadraticFormula,
            Some(num_expr(&disc)),
            format!("Discriminant b^2 - 4ac = {} < 0", disc),
        );
        b.push(vec![], Rule::Solution, None, "No real solution".to_string());
        return Ok(StepTrace { target: target.to_string(), steps: b.steps, solution: SolutionSet::NoRealSolution { discriminant: disc } });
    }

    let two_a = &Number::from_integer(2) * &a;
    if let Some(root_disc) = disc.exact_sqrt() {
        let r1 = &(&(-&bb) - &root_disc) / &two_a;
        let r2 = &(&(-&bb) + &root_disc) / &two_a;
        let mut roots = vec![r1.clone()];
        if r2 != r1 {
            roots.push(r2.clone());
        }
        // Factors list the larger root first: (x - 5)(x - 2).
        let leading = &a / &(&Number::from_big_integer(r1.denom().clone()) * &Number::from_big_integer(r2.denom().clone()));
        let factored = if roots.len() == 1 {
            Expr::pow(linear_factor(target, &r1), Expr::integer(2))
        } else {
            Expr::mul(linear_factor(target, &r2), linear_factor(target, &r1))
        };
        let factored = if leading.is_one() { factored } else { Expr::mul(num_expr(&leading), factored) };
        b.push(vec![Expr::relation(factored, RelOp::Eq, Expr::integer(0))], Rule::Factor, None, "Factor".to_string());
        let zero_rels: Vec<Expr> = roots
            .iter()
            .rev()
            .map(|root| Expr::relation(linear_factor(target, root), RelOp::Eq, Expr::integer(0)))
            .collect();
        b.push(zero_rels, Rule::ZeroProduct, None, "Set each factor equal to zero".to_string());
        let multiplicity = if roots.len() == 1 { 2 } else { 1 };
        let listed = roots.iter().map(|r| render_latex(&num_expr(r))).collect::<Vec<_>>().join(", ");
        let mut narration = format!("{target} = {listed}");
        if multiplicity == 2 {
            narration.push_str(" (double root)");
        }
        let sols: Vec<Root> = roots
            .iter()
            .map(|r| Root { expr: num_expr(r), value: r.to_f64(), exact: Some(r.clone()), multiplicity })
            .collect();
        b.push(
            sols.iter().map(|s| Expr::relation(x.clone(), RelOp::Eq, s.expr.clone())).collect(),
            Rule::Solution,
            None,
            narration,
        );
        return Ok(StepTrace { target: target.to_string(), steps: b.steps, solution: SolutionSet::Roots(sols) });
    }

    let sqrt = Expr::func(Func::Sqrt, num_expr(&disc));
    let neg_b = num_expr(&-&bb);
    let make = |minus: bool| {
        let numer = if bb.is_zero() {
            if minus { Expr::neg(sqrt.clone()) } else { sqrt.clone() }
        } else if minus {
            Expr::sub(neg_b.clone(), sqrt.clone())
        } else {
            Expr::add(neg_b.clone(), sqrt.clone())
        };
        Expr::div(numer, num_expr(&two_a))
    };
    let exprs = [make(true), make(false)];
    let env = crate::expr::Environment::new();
    let sols: Vec<Root> = exprs
        .iter()
        .map(|e| Root {
            expr: e.clone(),
            value: crate::expr::evaluate(e, &env).unwrap_or(f64::NAN),
            exact: None,
            multiplicity: 1,
        })
        .collect();
    let rels: Vec<Expr> = sols.iter().map(|s| Expr::relation(x.clone(), RelOp::Eq, s.expr.clone())).collect();
    b.push(rels.clone(), Rule::QuadraticFormula, Some(num_expr(&disc)), format!(
        "Quadratic formula with discriminant b^2 - 4ac = {disc}"
    ));
    let narration = format!(
        "{target} ≈ {}",
        sols.iter().map(|s| format!("{:.6}", s.value)).collect::<Vec<_>>().join(", ")
    );
    b.push(rels, Rule::Solution, None, narration);
    Ok(StepTrace { target: target.to_string(), steps: b.steps, solution: SolutionSet::Roots(sols) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_latex;

    fn rels(step: &Step) -> Vec<String> {
        step.relations.iter().map(render_latex).collect()
    }

    #[test]
    fn budget_inequality() {
        let trace = solve_linear_steps(&parse_latex("1.55192 t - 2734.55 > 400").unwrap(), "t").unwrap();
        let rules: Vec<Rule> = trace.steps.iter().map(|s| s.rule).collect();
        assert_eq!(rules, vec![Rule::Given, Rule::AddBothSides, Rule::DivideBothSides, Rule::Solution]);
        assert_eq!(rels(&trace.steps[1]), vec!["1.55192t > 3134.55"]);
        assert_eq!(rels(&trace.steps[2]), vec!["t > 3134.55/1.55192"]);
        assert!(trace.steps[3].narration.contains("2019.788391154"));
    }

    #[test]
    fn trivial_identity_is_one_step() {
        let trace = solve_linear_steps(&parse_latex("x + 0 = 5").unwrap(), "x").unwrap();
        assert_eq!(trace.steps.len(), 2);
        assert_eq!(rels(&trace.steps[1]), vec!["x = 5"]);
        assert_eq!(trace.steps[1].rule, Rule::Solution);
    }

    #[test]
    fn negative_divisor_flips() {
        let trace = solve_linear_steps(&parse_latex("-2x > 4").unwrap(), "x").unwrap();
        assert_eq!(rels(trace.steps.last().unwrap()), vec!["x < -2"]);
        assert_eq!(trace.solution, SolutionSet::Bound { op: RelOp::Lt, value: Number::from_integer(-2) });
    }

    #[test]
    fn linear_errors() {
        let rel = parse_latex("x^2 = 4").unwrap();
        assert_eq!(solve_linear_steps(&rel, "x"), Err(CasError::NotLinear("x".into())));
        assert_eq!(solve_linear_steps(&rel, "t"), Err(CasError::TargetAbsent("t".into())));
        assert!(solve_linear_steps(&parse_latex(r"\sin(x) = 0").unwrap(), "x").is_err());
    }

    #[test]
    fn variable_on_both_sides() {
        let trace = solve_linear_steps(&parse_latex("3x + 1 = x + 7").unwrap(), "x").unwrap();
        assert_eq!(trace.solution, SolutionSet::Bound { op: RelOp::Eq, value: Number::from_integer(3) });
    }

    #[test]
    fn factorable_quadratic() {
        let trace = factor_quadratic_steps(&parse_latex("x^2 - 7x + 10 = 0").unwrap(), "x").unwrap();
        let factor = trace.steps.iter().find(|s| s.rule == Rule::Factor).unwrap();
        assert_eq!(rels(factor), vec!["(x - 5) (x - 2) = 0"]);
        assert_eq!(rels(trace.steps.last().unwrap()), vec!["x = 2", "x = 5"]);
        assert_eq!(trace.steps.last().unwrap().narration, "x = 2, 5");
    }

    #[test]
    fn double_root_reported_once() {
        let trace = factor_quadratic_steps(&parse_latex("x^2 = 0").unwrap(), "x").unwrap();
        let SolutionSet::Roots(roots) = &trace.solution else { panic!() };
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].multiplicity, 2);
        assert_eq!(roots[0].value, 0.0);
    }

    #[test]
    fn negative_discriminant() {
        let trace = factor_quadratic_steps(&parse_latex("x^2 + 1 = 0").unwrap(), "x").unwrap();
        assert_eq!(trace.solution, SolutionSet::NoRealSolution { discriminant: Number::from_integer(-4) });
        assert!(trace.steps.iter().any(|s| s.narration.contains("-4")));
    }

    #[test]
    fn leading_coefficient_and_irrational_roots() {
        let trace = factor_quadratic_steps(&parse_latex("2x^2 - 3x + 1 = 0").unwrap(), "x").unwrap();
        let factor = trace.steps.iter().find(|s| s.rule == Rule::Factor).unwrap();
        assert_eq!(rels(factor), vec!["(x - 1) (2x - 1) = 0"]);
        let trace = factor_quadratic_steps(&parse_latex("x^2 - 2 = 0").unwrap(), "x").unwrap();
        let SolutionSet::Roots(roots) = &trace.solution else { panic!() };
        assert!((roots[0].value + 2f64.sqrt()).abs() < 1e-12);
        assert!((roots[1].value - 2f64.sqrt()).abs() < 1e-12);
        assert!(factor_quadratic_steps(&parse_latex("x^2 > 1").unwrap(), "x").is_err());
    }
}
