//! Canonical LaTeX output. `parse_latex(render_latex(e)) == e` for every
//! tree the parser can produce.

use super::ast::{BinOp, Expr, ExprKind, Func};

const PREC_REL: u8 = 0;
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Literal(n) if n.is_negative() => PREC_NEG,
        ExprKind::Literal(n) if n.to_decimal_string().is_none() => PREC_MUL,
        ExprKind::Literal(_) | ExprKind::Variable(_) | ExprKind::Indexed { .. } | ExprKind::Function { .. } => {
            PREC_ATOM
        }
        // Summation bodies extend to the right; callers parenthesize them
        // explicitly where that matters.
        ExprKind::Summation { .. } => PREC_ATOM,
        ExprKind::Neg(_) => PREC_NEG,
        ExprKind::Binary { op, .. } => match op {
            BinOp::Add | BinOp::Sub => PREC_ADD,
            BinOp::Mul | BinOp::Div => PREC_MUL,
            BinOp::Pow => PREC_POW,
        },
        ExprKind::Relation { .. } | ExprKind::Chain(_) => PREC_REL,
    }
}

fn is_summation(e: &Expr) -> bool {
    matches!(e.kind, ExprKind::Summation { .. })
}

fn is_negative_form(e: &Expr) -> bool {
    precedence(e) == PREC_NEG
}

fn paren(text: String) -> String {
    format!("({text})")
}

fn wrap_if(e: &Expr, cond: bool) -> String {
    let text = render_latex(e);
    if cond {
        paren(text)
    } else {
        text
    }
}

pub fn render_latex(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Literal(n) => n.to_string(),
        ExprKind::Variable(name) => name.clone(),
        ExprKind::Indexed { base, subscript } => format!("{base}_{{{}}}", render_latex(subscript)),
        ExprKind::Neg(inner) => {
            let wrap = precedence(inner) < PREC_NEG || is_summation(inner);
            format!("-{}", wrap_if(inner, wrap))
        }
        ExprKind::Function { func, arg } => {
            let arg = render_latex(arg);
            match func {
                Func::Sqrt => format!("\\sqrt{{{arg}}}"),
                Func::Abs => format!("|{arg}|"),
                Func::Sin | Func::Cos | Func::Tan | Func::Ln => format!("\\{}({arg})", func.name()),
            }
        }
        ExprKind::Summation { index, lower, upper, body } => {
            let body_text = wrap_if(body, precedence(body) < PREC_MUL);
            format!("\\sum_{{{index}={}}}^{{{}}} {body_text}", render_latex(lower), render_latex(upper))
        }
        ExprKind::Binary { op, lhs, rhs } => render_binary(*op, lhs, rhs),
        ExprKind::Relation { lhs, op, rhs } => {
            format!("{} {} {}", render_latex(lhs), op.latex(), render_latex(rhs))
        }
        ExprKind::Chain(parts) => parts.iter().map(render_latex).collect::<Vec<_>>().join(" = "),
    }
}

fn render_binary(op: BinOp, lhs: &Expr, rhs: &Expr) -> String {
    match op {
        BinOp::Add | BinOp::Sub => {
            let left = wrap_if(lhs, precedence(lhs) < PREC_ADD);
            let right = wrap_if(rhs, precedence(rhs) <= PREC_ADD || is_negative_form(rhs));
            let sym = if op == BinOp::Add { "+" } else { "-" };
            format!("{left} {sym} {right}")
        }
        BinOp::Mul | BinOp::Div => {
            let left = wrap_if(lhs, precedence(lhs) < PREC_MUL || is_summation(lhs));
            let right = wrap_if(rhs, precedence(rhs) <= PREC_NEG || is_summation(rhs));
            if op == BinOp::Div {
                return format!("{left}/{right}");
            }
            let joiner = match (left.chars().last(), right.chars().next()) {
                (_, Some(c)) if c.is_ascii_digit() || c == '.' || c == '|' => " \\cdot ",
                (Some(l), Some(r)) if l.is_ascii_digit() && r.is_ascii_alphabetic() => "",
                _ => " ",
            };
            format!("{left}{joiner}{right}")
        }
        BinOp::Pow => {
            let base = wrap_if(lhs, precedence(lhs) < PREC_ATOM || is_summation(lhs));
            format!("{base}^{{{}}}", render_latex(rhs))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse::parse_latex;

    #[test]
    fn renders_indexed_summation() {
        let e = Expr::sum("i", Expr::integer(1), Expr::var("n"), Expr::indexed("a", Expr::var("i")));
        assert_eq!(render_latex(&e), r"\sum_{i=1}^{n} a_{i}");
        assert_eq!(render_latex(&Expr::integer(3)), "3");
    }

    #[test]
    fn canonical_forms() {
        let cases = [
            ("y = x^2 + 6x + 10 = (x + 3)^2 + 1", "y = x^{2} + 6x + 10 = (x + 3)^{2} + 1"),
            ("1.55192 t - 2734.55 > 400", "1.55192t - 2734.55 > 400"),
            ("a \\leq -b", "a \\leq -b"),
            ("x + (-2)", "x + (-2)"),
            ("2 \\cdot 3 + x", "2 \\cdot 3 + x"),
            ("\\sqrt{(x-h)^2 + (y-k)^2} = r^2", "\\sqrt{(x - h)^{2} + (y - k)^{2}} = r^{2}"),
        ];
        for (src, want) in cases {
            assert_eq!(render_latex(&parse_latex(src).unwrap()), want, "{src}");
        }
    }

    #[test]
    fn parenthesizes_where_reparse_would_differ() {
        let sum = Expr::sum("i", Expr::integer(1), Expr::var("n"), Expr::var("i"));
        let e = Expr::mul(sum.clone(), Expr::var("x"));
        let text = render_latex(&e);
        assert_eq!(parse_latex(&text).unwrap(), e, "{text}");
        let nested = Expr::func(Func::Abs, Expr::mul(Expr::var("a"), Expr::func(Func::Abs, Expr::var("x"))));
        let text = render_latex(&nested);
        assert_eq!(parse_latex(&text).unwrap(), nested, "{text}");
        let right_div = Expr::mul(Expr::var("a"), Expr::div(Expr::var("b"), Expr::var("c")));
        assert_eq!(render_latex(&right_div), "a (b/c)");
    }
}
