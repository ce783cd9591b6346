//! Reactive sessions over a page document: a binding graph of variables,
//! formulas, plots, hints, examples and highlights, rebuilt into a complete
//! [`RenderState`] after every accepted event.

mod event;
mod graph;
mod state;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cas::{invert_widening, CasError, DEFAULT_TOL};
use crate::doc::PageModel;
use crate::expr::{
    evaluate, free_scalar_variables, relation_residual, render_latex, substitute_env, Expr, ExprKind,
};

pub use event::{Event, SessionError};
pub use graph::{
    canonical_name, plot_relation, BindingGraph, FormulaNode, HintNode, PlotNode, VariableNode, VariableOrigin,
    COORDINATES,
};
pub use state::{
    CurveState, ExampleState, FigureState, FormulaState, Guide, HighlightState, HintState, LabelHighlight, PageState,
    PlotState, RenderState, SegmentState, SolutionState, StepState, TokenState,
};

use graph::{promoted_name, residual_expr};
use state::{compute_example, compute_hint, project, sample_formula};

/// Residual bound for plotted points.
pub const RESIDUAL_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionOptions {
    /// New variables range over `value ± range_halfwidth`.
    pub range_halfwidth: f64,
    /// Initial value of free formula symbols.
    pub default_value: f64,
}

impl Default for SessionOptions {
    fn default() -> Self {
        SessionOptions { range_halfwidth: 10.0, default_value: 1.0 }
    }
}

/// Result of an accepted event.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Outcome {
    pub revision: u64,
    /// Id of the node the event created (plot or variable), if any.
    pub created: Option<String>,
}

pub struct Session {
    doc: Arc<PageModel>,
    options: SessionOptions,
    graph: BindingGraph,
    revision: u64,
    log: Vec<Event>,
    state: Arc<RenderState>,
}

impl Session {
    pub fn new(doc: Arc<PageModel>, options: SessionOptions) -> Self {
        let graph = BindingGraph {
            formulas: doc.formulas.iter().map(|f| FormulaNode { id: f.id.clone(), expr: f.expr.clone() }).collect(),
            ..BindingGraph::default()
        };
        let state = Arc::new(project(&doc, &graph, 0, None));
        Session { doc, options, graph, revision: 0, log: Vec::new(), state }
    }

    /// Applies `events` in order to a fresh session; fails with the index of
    /// the first rejected event.
    pub fn replay(
        doc: Arc<PageModel>,
        options: SessionOptions,
        events: &[Event],
    ) -> Result<Session, (usize, SessionError)> {
        let mut session = Session::new(doc, options);
        for (i, e) in events.iter().enumerate() {
            session.apply(e.clone()).map_err(|err| (i, err))?;
        }
        Ok(session)
    }

    pub fn document(&self) -> &Arc<PageModel> {
        &self.doc
    }

    pub fn options(&self) -> SessionOptions {
        self.options
    }

    pub fn graph(&self) -> &BindingGraph {
        &self.graph
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    /// Accepted events, in order.
    pub fn log(&self) -> &[Event] {
        &self.log
    }

    pub fn variable(&self, name: &str) -> Option<f64> {
        self.graph.variables.get(&canonical_name(name)).map(|v| v.value)
    }

    /// The snapshot at the current revision.
    pub fn render_state(&self) -> Arc<RenderState> {
        Arc::clone(&self.state)
    }

    /// Canonical JSON of [`render_state`](Self::render_state).
    pub fn state_json(&self) -> Vec<u8> {
        serde_json::to_vec(&*self.state).expect("render states serialize")
    }

    /// Applies one event atomically: a rejected event leaves the session
    /// untouched and is not logged.
    pub fn apply(&mut self, event: Event) -> Result<Outcome, SessionError> {
        let mut graph = self.graph.clone();
        let (created, notice) = self.mutate(&mut graph, &event)?;
        if !graph.is_acyclic() {
            return Err(SessionError::Cycle);
        }
        self.revision += 1;
        self.state = Arc::new(project(&self.doc, &graph, self.revision, notice));
        self.graph = graph;
        self.log.push(event);
        Ok(Outcome { revision: self.revision, created })
    }

    fn new_variable(&self, name: &str, value: f64, origin: VariableOrigin) -> VariableNode {
        let w = self.options.range_halfwidth.abs();
        VariableNode { name: name.to_string(), value, range: (value - w, value + w), origin }
    }

    fn interactive_expr<'g>(&self, graph: &'g BindingGraph, formula: &str) -> Result<&'g Expr, SessionError> {
        let node = graph.formula(formula).ok_or_else(|| SessionError::UnknownFormula(formula.to_string()))?;
        node.expr.as_ref().ok_or_else(|| SessionError::DisplayOnly(formula.to_string()))
    }

    fn mutate(&self, graph: &mut BindingGraph, event: &Event) -> Result<(Option<String>, Option<String>), SessionError> {
        match event {
            Event::Bind { formula, figure } => self.bind(graph, formula, figure).map(|id| (Some(id), None)),
            Event::Promote { formula, span } => {
                let expr = self.interactive_expr(graph, formula)?;
                let node = expr.find_by_span(*span).ok_or(SessionError::SpanNotLiteral)?;
                let value = match &node.kind {
                    ExprKind::Literal(n) if node.span == Some(*span) => n.to_f64(),
                    _ => return Err(SessionError::SpanNotLiteral),
                };
                let name = promoted_name(graph.promoted);
                let replaced =
                    expr.replace_at_span(*span, &Expr::var(name.clone())).ok_or(SessionError::SpanNotLiteral)?;
                graph.formula_mut(formula).expect("checked above").expr = Some(replaced);
                graph.promoted += 1;
                let origin = VariableOrigin::Promoted { formula: formula.clone(), span: *span };
                graph.variables.insert(name.clone(), self.new_variable(&name, value, origin));
                Ok((Some(name), None))
            }
            Event::Set { variable, value } => {
                if !value.is_finite() {
                    return Err(SessionError::NonFinite);
                }
                let name = canonical_name(variable);
                if !graph.variables.contains_key(&name) {
                    let origin = if COORDINATES.contains(&name.as_str()) {
                        VariableOrigin::Coordinate
                    } else if graph.formulas.iter().any(|f| {
                        f.expr.as_ref().is_some_and(|e| free_scalar_variables(e).contains(&name))
                    }) {
                        VariableOrigin::Parameter
                    } else {
                        return Err(SessionError::UnknownVariable(variable.clone()));
                    };
                    graph.variables.insert(name.clone(), self.new_variable(&name, *value, origin));
                    return Ok((None, None));
                }
                Ok((None, set_clamped(graph, &name, *value)))
            }
            Event::Drag { plot, to, variable } => self.drag(graph, plot, *to, variable).map(|n| (None, n)),
            Event::Highlight { symbol } => {
                if let Some(s) = symbol {
                    let known = COORDINATES.contains(&s.as_str())
                        || graph.variables.contains_key(s)
                        || self.doc.figures.iter().any(|g| g.labels.iter().any(|l| &l.name == s));
                    if !known {
                        return Err(SessionError::UnknownSymbol(s.clone()));
                    }
                }
                graph.highlight = symbol.clone();
                Ok((None, None))
            }
            Event::Hint { formula, target } => {
                self.interactive_expr(graph, formula)?;
                let node = HintNode { formula: formula.clone(), target: target.clone() };
                compute_hint(graph, &node).map_err(|e| SessionError::FeatureUnavailable(e.to_string()))?;
                graph.hints.retain(|h| &h.formula != formula);
                graph.hints.push(node);
                Ok((None, None))
            }
            Event::Example { formula } => {
                self.interactive_expr(graph, formula)?;
                compute_example(graph, formula).map_err(|e| SessionError::FeatureUnavailable(e.to_string()))?;
                if !graph.examples.contains(formula) {
                    graph.examples.push(formula.clone());
                }
                Ok((None, None))
            }
        }
    }

    fn bind(&self, graph: &mut BindingGraph, formula: &str, figure: &str) -> Result<String, SessionError> {
        let expr = self.interactive_expr(graph, formula)?.clone();
        let region = self.doc.figure(figure).ok_or_else(|| SessionError::UnknownFigure(figure.to_string()))?;
        if region.coord_map.is_none() {
            return Err(SessionError::MissingCalibration(figure.to_string()));
        }
        for name in graph.formula_parameters(formula) {
            if let std::collections::btree_map::Entry::Vacant(slot) = graph.variables.entry(name) {
                let node = self.new_variable(slot.key(), self.options.default_value, VariableOrigin::Parameter);
                slot.insert(node);
            }
        }
        sample_formula(region, &expr, &graph.parameters(), None)
            .map_err(|e| SessionError::NotPlottable(formula.to_string(), e.to_string()))?;
        let index = match graph.plots.iter().position(|p| p.figure == figure) {
            Some(i) => i,
            None => {
                let id = format!("p{}", graph.plots.len());
                graph.plots.push(PlotNode {
                    id,
                    figure: figure.to_string(),
                    formulas: Vec::new(),
                    anchors: Default::default(),
                });
                graph.plots.len() - 1
            }
        };
        let plot = &mut graph.plots[index];
        if !plot.formulas.iter().any(|f| f == formula) {
            plot.formulas.push(formula.to_string());
        }
        Ok(plot.id.clone())
    }

    fn drag(
        &self,
        graph: &mut BindingGraph,
        plot_id: &str,
        to: (f64, f64),
        variable: &str,
    ) -> Result<Option<String>, SessionError> {
        if !(to.0.is_finite() && to.1.is_finite()) {
            return Err(SessionError::NonFinite);
        }
        let plot = graph.plot(plot_id).ok_or_else(|| SessionError::UnknownPlot(plot_id.to_string()))?;
        let name = canonical_name(variable);
        let var = graph.variables.get(&name).ok_or_else(|| SessionError::UnknownVariable(variable.to_string()))?;
        let not_in_plot = || SessionError::VariableNotInPlot { variable: variable.to_string(), plot: plot_id.to_string() };
        if var.is_coordinate() {
            return Err(not_in_plot());
        }
        let formula = plot
            .formulas
            .iter()
            .find(|f| graph.formula_parameters(f).contains(&name))
            .cloned()
            .ok_or_else(not_in_plot)?;
        let expr = graph.formula(&formula).and_then(|f| f.expr.clone()).expect("bound formulas parse");
        let (center, limits) = (var.value, var.range);
        let mut env = graph.parameters();
        env.insert("x", to.0);
        env.insert("y", to.1);
        let relation = plot_relation(&expr, &env).ok_or_else(|| SessionError::DragUnsolvable(name.clone()))?;
        let residual = residual_expr(&relation).expect("plot relations are plain");
        let solved = invert_widening(
            |v| {
                env.insert(name.clone(), v);
                evaluate(&residual, &env).unwrap_or(f64::NAN)
            },
            center,
            1.0,
            limits,
            DEFAULT_TOL,
        )
        .map_err(|e| match e {
            CasError::DragUnsolvable | CasError::NoSignChange { .. } | CasError::ResidualUndefined(_) => {
                SessionError::DragUnsolvable(name.clone())
            }
            other => SessionError::FeatureUnavailable(other.to_string()),
        })?;
        graph.variables.get_mut(&name).expect("checked above").value = solved;
        let plot = graph.plots.iter_mut().find(|p| p.id == plot_id).expect("checked above");
        plot.anchors.insert(formula, to);
        Ok(None)
    }

    /// Recomputes every derived value from scratch and compares it with the
    /// current snapshot: displays, plotted residuals, pixel bounds and
    /// acyclicity.
    pub fn check_invariants(&self) -> Result<(), String> {
        if !self.graph.is_acyclic() {
            return Err("binding graph has a cycle".into());
        }
        let params = self.graph.parameters();
        for f in &self.state.formulas {
            let expr = self.graph.formula(&f.id).and_then(|n| n.expr.as_ref());
            let expected = expr.map(|e| render_latex(&substitute_env(e, &params)));
            if f.display != expected {
                return Err(format!("formula {} displays {:?}, expected {:?}", f.id, f.display, expected));
            }
        }
        for v in self.graph.variables.values() {
            if !(v.range.0 <= v.value && v.value <= v.range.1) && v.origin != VariableOrigin::Coordinate {
                return Err(format!("variable {} = {} outside its range", v.name, v.value));
            }
        }
        let (w, h) = (self.doc.width as f64, self.doc.height as f64);
        for plot in &self.state.plots {
            let figure = self.doc.figure(&plot.figure).ok_or("plot on unknown figure")?;
            for curve in &plot.curves {
                let expr = self.graph.formula(&curve.formula).and_then(|n| n.expr.as_ref()).ok_or("unbound formula")?;
                if curve.error.is_some() {
                    continue;
                }
                let rel = plot_relation(expr, &params).ok_or("curve drawn for an unplottable relation")?;
                for seg in &curve.segments {
                    for (&(x, y), &(px, py)) in seg.world.iter().zip(&seg.pixel) {
                        let mut env = params.clone();
                        env.insert("x", x);
                        env.insert("y", y);
                        let r = relation_residual(&rel, &env).map_err(|e| e.to_string())?;
                        if r > RESIDUAL_TOL {
                            return Err(format!("plot {} curve {} point ({x}, {y}) has residual {r} against {}", plot.id, curve.formula, render_latex(&rel)));
                        }
                        let b = figure.frame.bbox;
                        if !(0.0..=w).contains(&px) || !(0.0..=h).contains(&py) || !b.expand(1e-9).contains(px, py) {
                            return Err(format!("plot {} pixel ({px}, {py}) outside the figure", plot.id));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Sets a variable within its range; reports clamping.
fn set_clamped(graph: &mut BindingGraph, name: &str, value: f64) -> Option<String> {
    let v = graph.variables.get_mut(name).expect("caller checked");
    let clamped = value.clamp(v.range.0, v.range.1);
    v.value = clamped;
    (clamped != value).then(|| format!("{name} clamped to {clamped}"))
}
