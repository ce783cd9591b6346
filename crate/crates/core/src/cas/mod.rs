//! Symbolic services: simplification, solution traces, summation examples,
//! numeric inversion, and curve sampling.

mod poly;
mod root;
mod sample;
mod simplify;
mod steps;
mod summation;

use thiserror::Error;

pub use poly::Poly;
pub use root::{invert_numeric, invert_widening, DEFAULT_TOL, MAX_WIDENINGS};
pub(crate) use sample::{circle_params, explicit_rhs, sample_explicit};
pub use sample::{dyadic_grid, sample_curve, CurveKind, CurveSample, Polyline, DEFAULT_SAMPLES};
pub use simplify::simplify;
pub use steps::{factor_quadratic_steps, solve_linear_steps, Root, Rule, SolutionSet, Step, StepTrace};
pub use summation::{exact_value, expand_summation, ExampleExpansion, ELLIPSIS_THRESHOLD};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum CasError {
    #[error("not a relation")]
    NotARelation,
    #[error("{0} does not occur in the relation")]
    TargetAbsent(String),
    #[error("not a polynomial in {0}")]
    NotPolynomial(String),
    #[error("relation is not linear in {0}")]
    NotLinear(String),
    #[error("relation is not a quadratic equation in {0}")]
    NotQuadratic(String),
    #[error("not a summation")]
    NotSummation,
    #[error("summation bound is not an integer: {0}")]
    NonIntegerBound(String),
    #[error("residual has no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("residual is undefined at {0}")]
    ResidualUndefined(f64),
    #[error("no value of the variable reproduces the dragged point")]
    DragUnsolvable,
    #[error("relation is neither explicit in y nor a circle")]
    NotPlottable,
}
