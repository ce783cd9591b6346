#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use augmath::expr::{BinOp, Expr, Func, Number, RelOp};
use augmath::figure::{AxisFrame, Bitmap, Contour};
use proptest::prelude::*;

/// Formulas from the worked examples plus synthetic textbook-style ones.
pub const FORMULA_CORPUS: [&str; 30] = [
    "y = x^2 + 6x + 10 = (x + 3)^2 + 1",
    "y = (x + 3)^{2} + 1",
    "y = (x - a)^{n} + b",
    "(x + a)^n + b",
    "(x + a)^2 + b",
    r"\sqrt{(x-h)^2 + (y-k)^2} = r^2",
    r"\sqrt{(x-h)^2 + (y-k)^2} = r",
    "a^2 + b^2 = c^2",
    r"\sum_{i=1}^{20} i",
    r"\sum_{i=1}^{n} a_i",
    "1.55192 t - 2734.55 > 400",
    "x^2 - 7x + 10 = 0",
    "(x - 5) (x - 2) = 0",
    "y = 2x + 1",
    "y = -x^2 + 4",
    r"y = \sin(x)",
    r"y = 2\cos(3x) - 1",
    r"\tan(x) = 1",
    r"y = \ln(x + 1)",
    "y = |x - 2| + 3",
    "y = 1/x",
    "3x - 7 \\le 2x + 5",
    "2(x + 1) \\ge 4",
    "x^3 - 2x^2 + x = 0",
    "y = 0.5x^2 - 3x + 4.5",
    r"\sum_{k=1}^{10} k^2",
    r"\sum_{i=0}^{n} 2^i",
    "h = -4.9t^2 + 20t + 1.5",
    "A = 2^{-1} b h",
    "x^2 + y^2 = 25",
];

/// Finite, terminating non-negative literals so rendering never needs `p/q`.
fn literal() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0i64..50).prop_map(Expr::integer),
        (1i64..400, prop_oneof![Just(10i64), Just(100), Just(4), Just(8)])
            .prop_map(|(n, d)| Expr::number(Number::from_ratio(n, d).unwrap())),
    ]
}

fn variable() -> impl Strategy<Value = Expr> {
    prop::sample::select(vec!["x", "y", "a", "b", "c", "n", "h", "k", "r", "t"]).prop_map(Expr::var)
}

fn func() -> impl Strategy<Value = Func> {
    prop::sample::select(vec![Func::Sqrt, Func::Sin, Func::Cos, Func::Tan, Func::Ln, Func::Abs])
}

fn binop() -> impl Strategy<Value = BinOp> {
    prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow])
}

/// Random non-relational expressions of depth at most `depth`.
pub fn arb_term(depth: u32) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        3 => literal(),
        3 => variable(),
        1 => (prop::sample::select(vec!["a", "b"]), prop_oneof![variable(), literal()])
            .prop_map(|(base, sub)| Expr::indexed(base, sub)),
    ];
    leaf.prop_recursive(depth, 64, 2, |inner| {
        prop_oneof![
            4 => (binop(), inner.clone(), inner.clone()).prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            1 => inner.clone().prop_map(Expr::neg),
            1 => (func(), inner.clone()).prop_map(|(f, a)| Expr::func(f, a)),
            1 => (literal(), prop_oneof![literal(), variable()], inner)
                .prop_map(|(lo, hi, body)| Expr::sum("i", lo, hi, body)),
        ]
    })
}

/// Random expressions, relations, and `=` chains.
pub fn arb_expr() -> impl Strategy<Value = Expr> {
    let rel = prop::sample::select(vec![RelOp::Eq, RelOp::Lt, RelOp::Le, RelOp::Gt, RelOp::Ge]);
    prop_oneof![
        3 => arb_term(5),
        2 => (arb_term(4), rel, arb_term(4)).prop_map(|(l, op, r)| Expr::relation(l, op, r)),
        1 => prop::collection::vec(arb_term(3), 3..5).prop_map(Expr::chain),
    ]
}

/// Largest distance between detected and true axis endpoints and origins.
pub fn axis_error(found: &AxisFrame, truth: &AxisFrame) -> f64 {
    [
        (found.origin, truth.origin),
        (found.x_axis.start, truth.x_axis.start),
        (found.x_axis.end, truth.x_axis.end),
        (found.y_axis.start, truth.y_axis.start),
        (found.y_axis.end, truth.y_axis.end),
    ]
    .iter()
    .map(|(a, b)| (a.0 - b.0).hypot(a.1 - b.1))
    .fold(0.0, f64::max)
}

/// Fraction of stroke pixels within 2 px (Euclidean) of some path point.
pub fn path_overlap(path: &Contour, stroke: &Bitmap) -> f64 {
    let pts: HashSet<(i32, i32)> = path.points.iter().copied().collect();
    let total = stroke.count_ink();
    if total == 0 {
        return 0.0;
    }
    let near = stroke
        .ink_pixels()
        .filter(|&(x, y)| (-2..=2).any(|dy: i32| (-2..=2).any(|dx: i32| dx * dx + dy * dy <= 4 && pts.contains(&(x + dx, y + dy)))))
        .count();
    near as f64 / total as f64
}

/// Ink components (8-connected) and holes (4-connected background regions
/// not touching the border), counted by flood fill.
pub fn components_and_holes(b: &Bitmap) -> (usize, usize) {
    let (w, h) = (b.width() as i64, b.height() as i64);
    let mut seen = vec![false; (w * h) as usize];
    let idx = |x: i64, y: i64| (y * w + x) as usize;
    let (mut components, mut holes) = (0, 0);
    for sy in 0..h {
        for sx in 0..w {
            if seen[idx(sx, sy)] {
                continue;
            }
            let ink = b.get(sx, sy);
            let mut queue = VecDeque::from([(sx, sy)]);
            seen[idx(sx, sy)] = true;
            let mut touches_border = false;
            while let Some((x, y)) = queue.pop_front() {
                if x == 0 || y == 0 || x == w - 1 || y == h - 1 {
                    touches_border = true;
                }
                let neighbours: &[(i64, i64)] = if ink {
                    &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]
                } else {
                    &[(1, 0), (-1, 0), (0, 1), (0, -1)]
                };
                for (dx, dy) in neighbours {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx >= 0 && ny >= 0 && nx < w && ny < h && !seen[idx(nx, ny)] && b.get(nx, ny) == ink {
                        seen[idx(nx, ny)] = true;
                        queue.push_back((nx, ny));
                    }
                }
            }
            if ink {
                components += 1;
            } else if !touches_border {
                holes += 1;
            }
        }
    }
    (components, holes)
}

/// The ingested walkthrough page, built once per test binary.
pub fn walkthrough_doc() -> std::sync::Arc<augmath::doc::PageModel> {
    use std::sync::{Arc, OnceLock};
    static DOC: OnceLock<Arc<augmath::doc::PageModel>> = OnceLock::new();
    DOC.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        augmath::doc::write_walkthrough_bundle(dir.path()).unwrap();
        Arc::new(augmath::doc::ingest_page(dir.path()).unwrap())
    })
    .clone()
}

/// The walkthrough page plus extra unboxed formulas `f8`, `f9`, ...
pub fn doc_with(extra: &[&str]) -> std::sync::Arc<augmath::doc::PageModel> {
    use augmath::doc::{FormulaKind, FormulaRegion};
    let mut doc = (*walkthrough_doc()).clone();
    let base = doc.formulas.len();
    for (i, latex) in extra.iter().enumerate() {
        doc.formulas.push(FormulaRegion::new(format!("f{}", base + i), latex, None, FormulaKind::Display, 0.0));
    }
    std::sync::Arc::new(doc)
}

/// Character span of the `nth` occurrence of `needle` in `latex`.
pub fn span_of(latex: &str, needle: &str, nth: usize) -> augmath::expr::Span {
    let chars: Vec<char> = latex.chars().collect();
    let pat: Vec<char> = needle.chars().collect();
    let start = (0..=chars.len() - pat.len()).filter(|&i| chars[i..i + pat.len()] == pat[..]).nth(nth).expect("needle present");
    augmath::expr::Span::new(start, start + pat.len())
}

/// A random, frequently invalid, session event drawn against the current
/// state of `session`.
pub fn random_event(session: &augmath::session::Session, rng: &mut impl rand::Rng) -> augmath::session::Event {
    use augmath::session::Event;
    use rand::Rng;
    let state = session.render_state();
    let formula_ids: Vec<String> = state.formulas.iter().map(|f| f.id.clone()).chain(["f99".to_string()]).collect();
    let mut names: Vec<String> = state.variables.iter().map(|v| v.name.clone()).collect();
    names.extend(["x", "y", "h", "k", "r", "n", "q"].map(String::from));
    let pick = |rng: &mut dyn rand::RngCore, items: &[String]| items[rng.gen_range(0..items.len())].clone();
    // values on a 1/8 grid keep drags and vertices on sample points often
    let value = |rng: &mut dyn rand::RngCore| (rng.gen_range(-120i32..=120) as f64) / 8.0;
    match rng.gen_range(0..10) {
        0 | 1 => Event::Bind {
            formula: pick(rng, &formula_ids),
            figure: if rng.gen_bool(0.9) { "g0".into() } else { "g7".into() },
        },
        2 => {
            let f = &state.formulas[rng.gen_range(0..state.formulas.len())];
            let span = if !f.literals.is_empty() && rng.gen_bool(0.8) {
                f.literals[rng.gen_range(0..f.literals.len())]
            } else {
                let s = rng.gen_range(0..f.latex.chars().count().max(1));
                augmath::expr::Span::new(s, s + rng.gen_range(1..3))
            };
            Event::Promote { formula: f.id.clone(), span }
        }
        3 | 4 | 5 => Event::Set { variable: pick(rng, &names), value: value(rng) },
        6 => Event::Drag {
            plot: if rng.gen_bool(0.9) { "p0".into() } else { "p5".into() },
            to: (value(rng) / 2.0, value(rng)),
            variable: pick(rng, &names),
        },
        7 => Event::Highlight { symbol: if rng.gen_bool(0.2) { None } else { Some(pick(rng, &names)) } },
        8 => Event::Hint { formula: pick(rng, &formula_ids), target: None },
        _ => Event::Example { formula: pick(rng, &formula_ids) },
    }
}
