use serde::Serialize;

use crate::cas::{
    circle_params, dyadic_grid, expand_summation, explicit_rhs, factor_quadratic_steps, sample_explicit,
    solve_linear_steps, CasError, CurveKind, Polyline, Rule, SolutionSet, StepTrace, DEFAULT_SAMPLES,
};
use crate::doc::{FigureRegion, FormulaKind, GeometryLabel, PageModel};
use crate::expr::{free_scalar_variables, render_latex, substitute_env, Environment, Expr, ExprKind, RelOp, Span};
use crate::figure::{CoordMap, Rect, Segment};

use super::graph::{plot_relation, BindingGraph, HintNode, PlotNode, VariableNode, COORDINATES};

/// Everything the UI draws at one revision.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RenderState {
    pub revision: u64,
    pub page: PageState,
    pub formulas: Vec<FormulaState>,
    /// Detected formula boxes without LaTeX, shown as inert regions.
    pub unmatched_boxes: Vec<Rect>,
    pub figures: Vec<FigureState>,
    pub plots: Vec<PlotState>,
    pub variables: Vec<VariableNode>,
    pub highlight: Option<HighlightState>,
    pub hints: Vec<HintState>,
    pub examples: Vec<ExampleState>,
    pub tokens: Vec<TokenState>,
    /// Side effects of the last event worth telling the reader (clamping).
    pub notice: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PageState {
    pub image: String,
    pub width: u32,
    pub height: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormulaState {
    pub id: String,
    pub latex: String,
    /// Current values substituted; absent for display-only formulas.
    pub display: Option<String>,
    #[serde(rename = "box")]
    pub bbox: Option<Rect>,
    pub kind: FormulaKind,
    pub interactive: bool,
    pub parse_error: Option<String>,
    /// Spans of literals that can be promoted.
    pub literals: Vec<Span>,
    /// Session variables the formula depends on.
    pub variables: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FigureState {
    pub id: String,
    #[serde(rename = "box")]
    pub bbox: Rect,
    pub origin: (f64, f64),
    pub coord_map: Option<CoordMap>,
    pub has_path: bool,
    pub labels: Vec<GeometryLabel>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlotState {
    pub id: String,
    pub figure: String,
    pub curves: Vec<CurveState>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveState {
    pub formula: String,
    pub kind: Option<CurveKind>,
    /// The drawn relation with current values substituted.
    pub relation: Option<String>,
    pub segments: Vec<SegmentState>,
    /// Some samples fell outside the figure box and were dropped.
    pub clipped: bool,
    /// Variables a drag on this curve may control.
    pub controls: Vec<String>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentState {
    pub world: Vec<(f64, f64)>,
    pub pixel: Vec<(f64, f64)>,
    pub closed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HighlightState {
    pub symbol: String,
    pub guides: Vec<Guide>,
    pub segments: Vec<LabelHighlight>,
    /// Ids of tokens showing the symbol.
    pub tokens: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Guide {
    pub figure: String,
    /// `x` for a vertical line, `y` for a horizontal one.
    pub axis: String,
    pub value: f64,
    /// Absent when the value lies outside the figure box.
    pub segment: Option<Segment>,
    pub clipped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabelHighlight {
    pub figure: String,
    pub label: String,
    pub segment: Segment,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HintState {
    pub formula: String,
    pub target: Option<String>,
    pub available: bool,
    pub message: Option<String>,
    pub steps: Vec<StepState>,
    pub solution: Option<SolutionState>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepState {
    /// A disjunction; empty when there is no solution.
    pub relations: Vec<String>,
    pub rule: Rule,
    pub operand: Option<String>,
    pub narration: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolutionState {
    Bound { op: RelOp, value: f64, exact: String },
    Roots { values: Vec<f64>, exact: Vec<Option<String>>, multiplicity: Vec<u32> },
    NoRealSolution { discriminant: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExampleState {
    pub formula: String,
    pub available: bool,
    pub message: Option<String>,
    pub text: Option<String>,
    pub latex: Option<String>,
    pub terms: Vec<String>,
    pub ellipsis: bool,
    pub term_count: Option<u64>,
    pub value: Option<String>,
}

/// A variable occurrence inside a boxed formula, draggable on the page.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TokenState {
    pub id: String,
    pub formula: String,
    pub variable: String,
    pub span: Span,
    pub anchor: (f64, f64),
}

pub(crate) fn unavailable(e: &CasError) -> String {
    format!("feature unavailable for this formula: {e}")
}

pub(crate) fn project(doc: &PageModel, graph: &BindingGraph, revision: u64, notice: Option<String>) -> RenderState {
    let params = graph.parameters();
    let formulas = doc
        .formulas
        .iter()
        .map(|region| {
            let expr = graph.formula(&region.id).and_then(|f| f.expr.as_ref());
            let mut literals = Vec::new();
            if let Some(e) = expr {
                e.visit(&mut |n| {
                    if let (ExprKind::Literal(_), Some(s)) = (&n.kind, n.span) {
                        literals.push(s);
                    }
                });
            }
            let free = expr.map(free_scalar_variables).unwrap_or_default();
            FormulaState {
                id: region.id.clone(),
                latex: region.latex.clone(),
                display: expr.map(|e| render_latex(&substitute_env(e, &params))),
                bbox: region.bbox,
                kind: region.kind,
                interactive: expr.is_some(),
                parse_error: region.parse_error.clone(),
                literals,
                variables: graph.variables.keys().filter(|n| free.contains(*n)).cloned().collect(),
            }
        })
        .collect();
    let tokens = tokens(doc, graph);
    RenderState {
        revision,
        page: PageState { image: doc.image.clone(), width: doc.width, height: doc.height },
        formulas,
        unmatched_boxes: doc.unmatched_boxes.clone(),
        figures: doc
            .figures
            .iter()
            .map(|g| FigureState {
                id: g.id.clone(),
                bbox: g.frame.bbox,
                origin: g.frame.origin,
                coord_map: g.coord_map,
                has_path: g.paths.is_some(),
                labels: g.labels.clone(),
            })
            .collect(),
        plots: graph.plots.iter().map(|p| plot_state(doc, graph, p, &params)).collect(),
        variables: graph.variables.values().cloned().collect(),
        highlight: graph.highlight.as_ref().map(|s| highlight_state(doc, graph, s, &tokens)),
        hints: graph.hints.iter().map(|h| hint_state(graph, h)).collect(),
        examples: graph.examples.iter().map(|f| example_state(graph, f)).collect(),
        tokens,
        notice,
    }
}

fn plot_state(doc: &PageModel, graph: &BindingGraph, plot: &PlotNode, params: &Environment) -> PlotState {
    let figure = doc.figure(&plot.figure).expect("plots reference document figures");
    let curves = plot
        .formulas
        .iter()
        .map(|fid| {
            let expr = graph.formula(fid).and_then(|f| f.expr.as_ref()).expect("bound formulas parse");
            let controls =
                graph.formula_parameters(fid).into_iter().filter(|v| graph.variables.contains_key(v)).collect();
            let anchor = plot.anchors.get(fid).copied();
            match sample_formula(figure, expr, params, anchor) {
                Ok((kind, relation, segments, clipped)) => CurveState {
                    formula: fid.clone(),
                    kind: Some(kind),
                    relation: Some(render_latex(&substitute_env(&relation, params))),
                    segments,
                    clipped,
                    controls,
                    error: None,
                },
                Err(e) => CurveState {
                    formula: fid.clone(),
                    kind: None,
                    relation: None,
                    segments: Vec::new(),
                    clipped: false,
                    controls,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    PlotState { id: plot.id.clone(), figure: plot.figure.clone(), curves }
}

/// World x-range of a figure's box.
pub(crate) fn world_x_range(figure: &FigureRegion, map: &CoordMap) -> (f64, f64) {
    let b = figure.frame.bbox;
    let a = map.pixel_to_world((b.x, b.y)).0;
    let c = map.pixel_to_world((b.right(), b.y)).0;
    (a.min(c), a.max(c))
}

type Sampled = (CurveKind, Expr, Vec<SegmentState>, bool);

/// Samples a formula over a figure: explicit curves on the dyadic grid
/// (plus the drag anchor), circles at [`DEFAULT_SAMPLES`] angles starting
/// at the anchor. Points outside the figure box are dropped.
pub(crate) fn sample_formula(
    figure: &FigureRegion,
    expr: &Expr,
    params: &Environment,
    anchor: Option<(f64, f64)>,
) -> Result<Sampled, CasError> {
    let map = figure.coord_map.as_ref().ok_or(CasError::NotPlottable)?;
    let relation = plot_relation(expr, params).ok_or(CasError::NotPlottable)?;
    let (kind, lines) = if let Some(f) = explicit_rhs(expr) {
        let (lo, hi) = world_x_range(figure, map);
        let (first, step, count) = dyadic_grid(lo, hi);
        let mut xs: Vec<f64> = (0..count).map(|i| first + step * i as f64).collect();
        if let Some((ax, _)) = anchor {
            if (lo..=hi).contains(&ax) && !xs.contains(&ax) {
                let at = xs.partition_point(|&x| x < ax);
                xs.insert(at, ax);
            }
        }
        (CurveKind::Explicit, sample_explicit(f, params, &xs))
    } else {
        let (h, k, r) = circle_params(expr, params).ok_or(CasError::NotPlottable)?;
        let start = anchor.map_or(0.0, |(x, y)| (y - k).atan2(x - h));
        let points = (0..DEFAULT_SAMPLES)
            .map(|i| {
                let t = start + std::f64::consts::TAU * i as f64 / DEFAULT_SAMPLES as f64;
                (h + r * t.cos(), k + r * t.sin())
            })
            .collect();
        (CurveKind::Circle, vec![Polyline { points, closed: true }])
    };
    let (segments, clipped) = clip(&lines, map, &figure.frame.bbox);
    Ok((kind, relation, segments, clipped))
}

fn clip(lines: &[Polyline], map: &CoordMap, bbox: &Rect) -> (Vec<SegmentState>, bool) {
    let inside = |p: (f64, f64)| p.0 >= bbox.x && p.0 <= bbox.right() && p.1 >= bbox.y && p.1 <= bbox.bottom();
    let mut out = Vec::new();
    let mut clipped = false;
    for line in lines {
        let mut run = SegmentState { world: Vec::new(), pixel: Vec::new(), closed: false };
        let mut dropped = false;
        for &w in &line.points {
            let p = map.world_to_pixel(w);
            if inside(p) {
                run.world.push(w);
                run.pixel.push(p);
            } else {
                dropped = true;
                if !run.world.is_empty() {
                    out.push(std::mem::replace(&mut run, SegmentState { world: Vec::new(), pixel: Vec::new(), closed: false }));
                }
            }
        }
        run.closed = line.closed && !dropped;
        out.push(run);
        clipped |= dropped;
    }
    out.retain(|s| s.world.len() >= 2);
    (out, clipped)
}

fn tokens(doc: &PageModel, graph: &BindingGraph) -> Vec<TokenState> {
    let mut out = Vec::new();
    for region in &doc.formulas {
        let (Some(bbox), Some(expr)) = (region.bbox, graph.formula(&region.id).and_then(|f| f.expr.as_ref())) else {
            continue;
        };
        let len = region.latex.chars().count().max(1) as f64;
        expr.visit(&mut |n| {
            if let (ExprKind::Variable(name), Some(span)) = (&n.kind, n.span) {
                if graph.variables.get(name).is_some_and(|v| !v.is_coordinate()) {
                    let t = (span.start + span.end) as f64 / 2.0 / len;
                    out.push(TokenState {
                        id: format!("{}:{}-{}", region.id, span.start, span.end),
                        formula: region.id.clone(),
                        variable: name.clone(),
                        span,
                        anchor: (bbox.x + bbox.w * t, bbox.y + bbox.h / 2.0),
                    });
                }
            }
        });
    }
    out
}

fn highlight_state(doc: &PageModel, graph: &BindingGraph, symbol: &str, tokens: &[TokenState]) -> HighlightState {
    let mut guides = Vec::new();
    if COORDINATES.contains(&symbol) {
        let value = graph.variables.get(symbol).map_or(0.0, |v| v.value);
        for g in &doc.figures {
            let Some(map) = &g.coord_map else { continue };
            let b = g.frame.bbox;
            let (segment, clipped) = if symbol == "x" {
                let px = map.world_to_pixel((value, 0.0)).0;
                let inside = px >= b.x && px <= b.right();
                (inside.then(|| Segment { start: (px, b.y), end: (px, b.bottom()) }), !inside)
            } else {
                let py = map.world_to_pixel((0.0, value)).1;
                let inside = py >= b.y && py <= b.bottom();
                (inside.then(|| Segment { start: (b.x, py), end: (b.right(), py) }), !inside)
            };
            guides.push(Guide { figure: g.id.clone(), axis: symbol.to_string(), value, segment, clipped });
        }
    }
    let segments = doc
        .figures
        .iter()
        .flat_map(|g| {
            g.labels.iter().filter(|l| l.name == symbol).map(|l| LabelHighlight {
                figure: g.id.clone(),
                label: l.name.clone(),
                segment: l.segment,
            })
        })
        .collect();
    HighlightState {
        symbol: symbol.to_string(),
        guides,
        segments,
        tokens: tokens.iter().filter(|t| t.variable == symbol).map(|t| t.id.clone()).collect(),
    }
}

/// `x`, then `t`, then the alphabetically first free name.
fn default_target(e: &Expr) -> Option<String> {
    let free = free_scalar_variables(e);
    ["x", "t"].iter().map(|s| s.to_string()).find(|s| free.contains(s)).or_else(|| free.into_iter().next())
}

/// Linear isolation, falling back to quadratic factoring.
pub(crate) fn compute_hint(graph: &BindingGraph, hint: &HintNode) -> Result<(String, StepTrace), CasError> {
    let expr = graph.formula(&hint.formula).and_then(|f| f.expr.as_ref()).ok_or(CasError::NotARelation)?;
    let mut env = graph.parameters();
    if let Some(t) = &hint.target {
        env.remove(t);
    }
    let e = substitute_env(expr, &env);
    let target = match &hint.target {
        Some(t) => t.clone(),
        None => default_target(&e).ok_or(CasError::NotARelation)?,
    };
    let trace = match solve_linear_steps(&e, &target) {
        Ok(t) => t,
        Err(CasError::NotLinear(_)) => factor_quadratic_steps(&e, &target)?,
        Err(err) => return Err(err),
    };
    Ok((target, trace))
}

fn hint_state(graph: &BindingGraph, hint: &HintNode) -> HintState {
    match compute_hint(graph, hint) {
        Ok((target, trace)) => HintState {
            formula: hint.formula.clone(),
            target: Some(target),
            available: true,
            message: None,
            steps: trace
                .steps
                .iter()
                .map(|s| StepState {
                    relations: s.relations.iter().map(render_latex).collect(),
                    rule: s.rule,
                    operand: s.operand.as_ref().map(render_latex),
                    narration: s.narration.clone(),
                })
                .collect(),
            solution: Some(match &trace.solution {
                SolutionSet::Bound { op, value } => {
                    SolutionState::Bound { op: *op, value: value.to_f64(), exact: value.to_string() }
                }
                SolutionSet::Roots(roots) => SolutionState::Roots {
                    values: roots.iter().map(|r| r.value).collect(),
                    exact: roots.iter().map(|r| r.exact.as_ref().map(ToString::to_string)).collect(),
                    multiplicity: roots.iter().map(|r| r.multiplicity).collect(),
                },
                SolutionSet::NoRealSolution { discriminant } => {
                    SolutionState::NoRealSolution { discriminant: discriminant.to_string() }
                }
            }),
        },
        Err(e) => HintState {
            formula: hint.formula.clone(),
            target: hint.target.clone(),
            available: false,
            message: Some(unavailable(&e)),
            steps: Vec::new(),
            solution: None,
        },
    }
}

fn first_summation(e: &Expr) -> Option<&Expr> {
    let mut found = None;
    e.visit(&mut |n| {
        if found.is_none() && matches!(n.kind, ExprKind::Summation { .. }) {
            found = Some(n);
        }
    });
    found
}

pub(crate) fn compute_example(graph: &BindingGraph, formula: &str) -> Result<crate::cas::ExampleExpansion, CasError> {
    let expr = graph.formula(formula).and_then(|f| f.expr.as_ref()).ok_or(CasError::NotSummation)?;
    let params = graph.parameters();
    let e = substitute_env(expr, &params);
    let s = first_summation(&e).ok_or(CasError::NotSummation)?;
    expand_summation(s, &params)
}

fn example_state(graph: &BindingGraph, formula: &str) -> ExampleState {
    match compute_example(graph, formula) {
        Ok(x) => ExampleState {
            formula: formula.to_string(),
            available: true,
            message: None,
            text: Some(x.text),
            latex: Some(x.latex),
            terms: x.terms,
            ellipsis: x.ellipsis,
            term_count: x.term_count,
            value: x.value.map(|v| v.to_string()),
        },
        Err(e) => ExampleState {
            formula: formula.to_string(),
            available: false,
            message: Some(unavailable(&e)),
            text: None,
            latex: None,
            terms: Vec::new(),
            ellipsis: false,
            term_count: None,
            value: None,
        },
    }
}
