//! Acceptance suite: one PASS/FAIL line per criterion; exits non-zero when
//! any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use augmath::cas::{expand_summation, factor_quadratic_steps, solve_linear_steps, Rule, SolutionSet};
use augmath::doc::{max_weight_matching, DEFAULT_THRESHOLD};
use augmath::expr::{parse_latex, render_latex, Environment, Expr, Number, RelOp};
use augmath::figure::{
    binarize, detect_axes_with, extract_contours, extract_graph_path_with, filter_text_components,
    generate_synthetic_figure, synthetic_corpus, FigureConfig,
};
use augmath::session::{Event, Session, SessionOptions};
use common::{arb_expr, axis_error, path_overlap, random_event, span_of, walkthrough_doc, FORMULA_CORPUS};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn p(src: &str) -> Expr {
    parse_latex(src).unwrap_or_else(|e| panic!("{src}: {e}"))
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

/// Lowest sampled point of the parabola bound to `p0`.
fn vertex(session: &Session) -> Option<(f64, f64)> {
    let state = session.render_state();
    let curve = state.plots.first()?.curves.iter().find(|c| c.formula == "f0")?;
    curve.segments.iter().flat_map(|s| s.world.iter().copied()).min_by(|a, b| a.1.total_cmp(&b.1))
}

fn walkthrough() -> Outcome {
    let start = Instant::now();
    let doc = walkthrough_doc();
    let latex = doc.formulas.iter().find(|f| f.id == "f0").unwrap().latex.clone();
    ensure(latex == "y = (x + 3)^{2} + 1", || format!("f0 is {latex}"))?;
    let mut s = Session::new(doc, SessionOptions::default());
    let ok = |s: &mut Session, e: Event| s.apply(e.clone()).map_err(|err| format!("{e:?}: {err}"));
    ok(&mut s, Event::Bind { formula: "f0".into(), figure: "g0".into() })?;
    ok(&mut s, Event::Promote { formula: "f0".into(), span: span_of(&latex, "3", 0) })?;
    ok(&mut s, Event::Promote { formula: "f0".into(), span: span_of(&latex, "1", 0) })?;
    let (a0, b0) = (3.0, 1.0);
    let (mut a, mut b) = (a0, b0);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let grid = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| {
        (rng.gen_range((lo * 32.0) as i32..=(hi * 32.0) as i32) as f64) / 32.0
    };
    let steps = 40;
    let mut worst: f64 = 0.0;
    for step in 0..steps {
        let (a_new, b_new) = (grid(&mut rng, -1.0, 7.0), grid(&mut rng, -0.5, 10.0));
        match step % 4 {
            0 => {
                ok(&mut s, Event::Set { variable: "a₀".into(), value: a_new })?;
                a = a_new;
            }
            1 => {
                ok(&mut s, Event::Set { variable: "a1".into(), value: b_new })?;
                b = b_new;
            }
            2 => {
                // the curve through (x, y) with the current a has b = y - (x + a)^2
                let x = grid(&mut rng, -4.0, 1.0);
                let y = (x + a).powi(2) + b_new;
                ok(&mut s, Event::Drag { plot: "p0".into(), to: (x, y), variable: "a₁".into() })?;
                b = b_new;
            }
            _ => {
                // solving (x + a)^2 + b = y for a gives -x ± d; the root nearest the current a wins,
                // and the sign of d puts the other root on the far side
                let d = grid(&mut rng, 0.5, 2.0) * if a_new >= a { -1.0 } else { 1.0 };
                let x = -a_new + d;
                let y = d * d + b;
                ok(&mut s, Event::Drag { plot: "p0".into(), to: (x, y), variable: "a₀".into() })?;
                let roots = [-x + d, -x - d];
                a = if (roots[0] - a).abs() <= (roots[1] - a).abs() { roots[0] } else { roots[1] };
            }
        }
        let v = vertex(&s).ok_or("no polyline")?;
        let err = (v.0 - (-a)).abs().max((v.1 - b).abs());
        worst = worst.max(err);
        ensure(err <= 1e-6, || format!("step {step}: vertex {v:?}, expected ({}, {b})", -a))?;
    }
    let (da, db) = (a0 - a, b - b0);
    let v = vertex(&s).unwrap();
    ensure((v.0 - (-3.0 + da)).abs() <= 1e-6 && (v.1 - (1.0 + db)).abs() <= 1e-6, || format!("final vertex {v:?}"))?;
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!(
        "{steps} scripted events, final vertex ({:.5}, {:.5}) = (-3{da:+}, 1{db:+}), worst error {worst:.1e}, {:.2?}",
        v.0,
        v.1,
        start.elapsed()
    ))
}

fn step_traces() -> Outcome {
    let trace = factor_quadratic_steps(&p("x^2 - 7x + 10 = 0"), "x").map_err(|e| e.to_string())?;
    let factored = trace.steps.iter().find(|s| s.rule == Rule::Factor).ok_or("no factor step")?;
    ensure(factored.relations.len() == 1 && factored.relations[0] == p("(x-5)(x-2)=0"), || {
        format!("factored form {:?}", factored.relations.iter().map(render_latex).collect::<Vec<_>>())
    })?;
    let SolutionSet::Roots(roots) = &trace.solution else { return Err(format!("{:?}", trace.solution)) };
    let exact: Vec<Option<Number>> = roots.iter().map(|r| r.exact.clone()).collect();
    ensure(exact == vec![Some(Number::from_integer(2)), Some(Number::from_integer(5))], || format!("roots {exact:?}"))?;

    let trace = solve_linear_steps(&p("1.55192t - 2734.55 > 400"), "t").map_err(|e| e.to_string())?;
    let SolutionSet::Bound { op, value } = &trace.solution else { return Err(format!("{:?}", trace.solution)) };
    ensure(*op == RelOp::Gt, || format!("op {op:?}"))?;
    let shown = trace.steps.iter().rev().find(|s| s.rule == Rule::DivideBothSides).ok_or("no division step")?;
    let shown = render_latex(&shown.relations[0]);
    ensure(shown == "t > 3134.55/1.55192", || format!("division step {shown}"))?;
    let oracle = BigRational::new(BigInt::from(313_455_000), BigInt::from(155_192));
    let (got, want) = (value.to_f64(), oracle.to_f64().unwrap());
    let digits = format!("{:.9e}", got) == format!("{:.9e}", want);
    ensure(value.as_rational() == &oracle && digits, || format!("bound {got} vs oracle {want}"))?;
    Ok(format!("(x - 5)(x - 2) = 0, roots {{2, 5}}; t > {} = {want:.10}", oracle))
}

/// Exact sum of `c0 + c1 i + c2 i^2` over `lo..=hi`, computed term by term.
fn sum_oracle(c: &[BigRational; 3], lo: i64, hi: i64) -> BigRational {
    let mut total = BigRational::zero();
    for i in lo..=hi {
        let i = BigRational::from_integer(BigInt::from(i));
        total += &c[0] + &c[1] * &i + &c[2] * &i * &i;
    }
    total
}

fn expansion() -> Outcome {
    let e = expand_summation(&p(r"\sum_{i=1}^{20} i"), &Environment::new()).map_err(|e| e.to_string())?;
    ensure(e.text == "1 + 2 + ⋯ + 20", || format!("text {}", e.text))?;
    ensure(e.value == Some(Number::from_integer(210)), || format!("value {:?}", e.value))?;
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let mut failures = Vec::new();
    for _ in 0..500 {
        // coefficients on a 1/4 grid, written as decimals
        let quarters: [i64; 3] = [rng.gen_range(-40..=40), rng.gen_range(-40..=40), rng.gen_range(-12..=12)];
        let lo = rng.gen_range(0..=6);
        let hi = lo + rng.gen_range(0..=30);
        let lit = |q: i64| format!("{}", q as f64 / 4.0);
        let latex = format!(r"\sum_{{i={lo}}}^{{{hi}}} ({} + {} i + {} i^{{2}})", lit(quarters[0]), lit(quarters[1]), lit(quarters[2]))
            .replace("+ -", "- ");
        let c = quarters.map(|q| BigRational::new(BigInt::from(q), BigInt::from(4)));
        let want = sum_oracle(&c, lo, hi);
        match expand_summation(&p(&latex), &Environment::new()) {
            Ok(e) if e.value.as_ref().map(Number::as_rational) == Some(&want)
                && e.term_count == Some((hi - lo + 1) as u64) => {}
            Ok(e) => failures.push(format!("{latex}: {:?} vs {want}", e.value)),
            Err(err) => failures.push(format!("{latex}: {err}")),
        }
    }
    ensure(failures.is_empty(), || format!("{} failures, first: {}", failures.len(), failures[0]))?;
    Ok("1 + 2 + ⋯ + 20 = 210; 500/500 random summations match the exact term-by-term oracle".into())
}

fn parser() -> Outcome {
    for src in FORMULA_CORPUS {
        let e = parse_latex(src).map_err(|err| format!("{src}: {err}"))?;
        let text = render_latex(&e);
        let back = parse_latex(&text).map_err(|err| format!("{text}: {err}"))?;
        ensure(back == e && render_latex(&back) == text, || format!("{src} -> {text}"))?;
    }
    let mut runner = TestRunner::deterministic();
    let strategy = arb_expr();
    let mut failures = 0;
    let mut first = None;
    for _ in 0..10_000 {
        let e = strategy.new_tree(&mut runner).map_err(|r| r.to_string())?.current();
        let text = render_latex(&e);
        if parse_latex(&text).ok() != Some(e) {
            failures += 1;
            first.get_or_insert(text);
        }
    }
    ensure(failures == 0, || format!("{failures} random ASTs failed, first {first:?}"))?;
    Ok(format!("{}/{} corpus fixpoints, 10000/10000 random ASTs", FORMULA_CORPUS.len(), FORMULA_CORPUS.len()))
}

fn figures() -> Outcome {
    let start = Instant::now();
    let cfg = FigureConfig::default();
    let mut lines = Vec::new();
    let mut errors = Vec::new();
    for noisy in [false, true] {
        let corpus = synthetic_corpus(7, noisy);
        ensure(corpus.len() == 50, || format!("corpus size {}", corpus.len()))?;
        let (mut axes_ok, mut path_ok, mut min_overlap) = (0, 0, f64::INFINITY);
        for spec in &corpus {
            let fig = generate_synthetic_figure(spec).map_err(|e| e.to_string())?;
            let cs = filter_text_components(&extract_contours(&binarize(&fig.image, cfg.binarize_threshold)), cfg.min_contour_len);
            let Ok(frame) = detect_axes_with(&cs, &cfg) else { continue };
            if axis_error(&frame, &fig.axes) <= 3.0 {
                axes_ok += 1;
            }
            if !noisy {
                let overlap = extract_graph_path_with(&cs, &frame, &cfg)
                    .map(|paths| path_overlap(&paths.primary, &fig.stroke_masks[0]))
                    .unwrap_or(0.0);
                min_overlap = min_overlap.min(overlap);
                if overlap >= 0.95 {
                    path_ok += 1;
                }
            }
        }
        if noisy {
            lines.push(format!("noisy axes {axes_ok}/50"));
            if axes_ok * 100 < 90 * 50 {
                errors.push(format!("noisy axes {axes_ok}/50 < 90%"));
            }
        } else {
            lines.push(format!("clean axes {axes_ok}/50, paths {path_ok}/50 (min overlap {:.1}%)", 100.0 * min_overlap));
            if axes_ok < 50 {
                errors.push(format!("clean axes {axes_ok}/50"));
            }
            if path_ok < 50 {
                errors.push(format!("clean paths {path_ok}/50"));
            }
        }
    }
    ensure(errors.is_empty(), || errors.join("; "))?;
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("{}, {:.2?}", lines.join(", "), start.elapsed()))
}

/// Best total over every partial injective assignment.
fn brute_force(scores: &[Vec<f64>], row: usize, used: &mut [bool]) -> f64 {
    if row == scores.len() {
        return 0.0;
    }
    let mut best = brute_force(scores, row + 1, used);
    for j in 0..used.len() {
        if !used[j] && scores[row][j] >= DEFAULT_THRESHOLD {
            used[j] = true;
            best = best.max(scores[row][j] + brute_force(scores, row + 1, used));
            used[j] = false;
        }
    }
    best
}

fn alignment() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    for n in 0..200 {
        let (rows, cols) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let scores: Vec<Vec<f64>> = (0..rows)
            .map(|_| (0..cols).map(|_| if rng.gen_bool(0.2) { 0.75 } else { rng.gen_range(0.0..1.0) }).collect())
            .collect();
        let m = max_weight_matching(&scores, DEFAULT_THRESHOLD);
        let mut used = vec![false; cols];
        for j in m.iter().flatten() {
            ensure(!std::mem::replace(&mut used[*j], true), || format!("instance {n}: box {j} used twice"))?;
        }
        let got: f64 = m.iter().enumerate().filter_map(|(i, j)| j.map(|j| scores[i][j])).sum();
        let best = brute_force(&scores, 0, &mut vec![false; cols]);
        ensure((got - best).abs() < 1e-9, || format!("instance {n}: {got} vs optimum {best}"))?;
    }
    Ok("200/200 instances (up to 6x6) equal the brute-force optimum".into())
}

fn session_determinism() -> Outcome {
    let doc = walkthrough_doc();
    let mut summary = Vec::new();
    for seed in [11u64, 12, 13] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = Session::new(Arc::clone(&doc), SessionOptions::default());
        for i in 1..=1000 {
            let e = random_event(&s, &mut rng);
            let _ = s.apply(e);
            if i % 100 == 0 {
                s.check_invariants().map_err(|err| format!("seed {seed}, event {i}: {err}"))?;
            }
        }
        let replayed = Session::replay(Arc::clone(&doc), SessionOptions::default(), s.log())
            .map_err(|(i, err)| format!("seed {seed}: replay rejected event {i}: {err}"))?;
        ensure(replayed.state_json() == s.state_json(), || format!("seed {seed}: replay differs"))?;
        summary.push(format!("seed {seed}: {} accepted", s.revision()));
    }
    Ok(format!("1000 events per seed, invariants every 100, byte-identical replay ({})", summary.join(", ")))
}

fn offline_online() -> Outcome {
    use augmath_gateway::cli::run_script;
    use augmath_gateway::protocol::state_message;
    use augmath_gateway::service::{router, AppState};
    use axum::body::Body;
    use axum::http::{Request, StatusCode};
    use http_body_util::BodyExt;
    use tower::ServiceExt;

    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../gateway/tests/golden");
    let mut scripts: Vec<_> = std::fs::read_dir(&dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    scripts.sort();
    ensure(scripts.len() == 5, || format!("{} golden scripts", scripts.len()))?;
    let doc = (*walkthrough_doc()).clone();
    let runtime = tokio::runtime::Builder::new_current_thread().build().unwrap();
    for path in &scripts {
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        let raw: Vec<serde_json::Value> = serde_json::from_slice(&std::fs::read(path).unwrap()).map_err(|e| e.to_string())?;
        let events: Vec<Event> = raw.iter().map(|v| serde_json::from_value(v.clone()).unwrap()).collect();
        let offline = run_script(doc.clone(), &events).map_err(|e| format!("{name}: {e}"))?;
        let app = router(Arc::new(AppState::new(doc.clone(), std::env::temp_dir(), None)));
        let online = runtime.block_on(async {
            let call = |uri: String, body: Vec<u8>| {
                let app = app.clone();
                async move {
                    let req = Request::post(uri).header("content-type", "application/json").body(Body::from(body)).unwrap();
                    let resp = app.oneshot(req).await.unwrap();
                    let status = resp.status();
                    (status, resp.into_body().collect().await.unwrap().to_bytes())
                }
            };
            let (status, created) = call("/api/sessions".into(), Vec::new()).await;
            assert_eq!(status, StatusCode::CREATED);
            let id = serde_json::from_slice::<serde_json::Value>(&created).unwrap()["session"].as_str().unwrap().to_string();
            let mut last = created;
            for e in &raw {
                let (status, body) = call(format!("/api/sessions/{id}/events"), serde_json::to_vec(e).unwrap()).await;
                assert_eq!(status, StatusCode::OK, "{name}: {}", String::from_utf8_lossy(&body));
                last = body;
            }
            (id, last)
        });
        let expected = state_message(&online.0, offline.revision(), &offline.state_json());
        ensure(online.1.as_ref() == expected.as_slice(), || format!("{name}: online state differs from offline"))?;
    }
    Ok(format!("{} golden scripts byte-identical offline and online", scripts.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("walkthrough reproduction", walkthrough),
        ("step-trace exactness", step_traces),
        ("summation expansion", expansion),
        ("parser round-trip", parser),
        ("synthetic figure extraction", figures),
        ("alignment optimality", alignment),
        ("session determinism", session_determinism),
        ("offline/online equivalence", offline_online),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL {name}: {reason}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
