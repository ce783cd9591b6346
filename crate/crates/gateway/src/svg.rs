//! Deterministic SVG rendering of a [`RenderState`]'s page overlays.

use std::fmt::Write;

use augmath::figure::Rect;
use augmath::session::RenderState;

fn esc(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Fixed two-decimal coordinates, with `-0.00` normalised.
fn n(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn rect(out: &mut String, r: &Rect, class: &str, id: &str) {
    let _ = writeln!(
        out,
        r#"  <rect class="{class}" data-id="{}" x="{}" y="{}" width="{}" height="{}"/>"#,
        esc(id),
        n(r.x),
        n(r.y),
        n(r.w),
        n(r.h)
    );
}

const STYLE: &str = "rect.formula{fill:none;stroke:#1f77b4}rect.display-only{fill:none;stroke:#999;stroke-dasharray:4 2}\
rect.unmatched{fill:none;stroke:#d62728;stroke-dasharray:2 2}rect.figure{fill:none;stroke:#2ca02c}\
.curve{fill:none;stroke:#ff7f0e;stroke-width:2}line.guide{stroke:#9467bd;stroke-dasharray:6 3}\
line.label{stroke:#e377c2;stroke-width:3}circle.token{fill:#ff7f0e}text{font:12px sans-serif}";

/// The page image with region outlines, curves, highlights, tokens and
/// hint/example panels; the same state always yields the same bytes.
pub fn render_svg(state: &RenderState) -> String {
    let (w, h) = (state.page.width, state.page.height);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" width="{w}" height="{h}" viewBox="0 0 {w} {h}" data-revision="{}">"#,
        state.revision
    );
    let _ = writeln!(out, "  <style>{STYLE}</style>");
    let _ = writeln!(out, r#"  <image href="{}" x="0" y="0" width="{w}" height="{h}"/>"#, esc(&state.page.image));
    for f in &state.formulas {
        if let Some(b) = &f.bbox {
            rect(&mut out, b, if f.interactive { "formula" } else { "display-only" }, &f.id);
        }
    }
    for (i, b) in state.unmatched_boxes.iter().enumerate() {
        rect(&mut out, b, "unmatched", &format!("u{i}"));
    }
    for g in &state.figures {
        rect(&mut out, &g.bbox, "figure", &g.id);
    }
    for plot in &state.plots {
        for c in &plot.curves {
            for seg in &c.segments {
                let points: Vec<String> = seg.pixel.iter().map(|p| format!("{},{}", n(p.0), n(p.1))).collect();
                let tag = if seg.closed { "polygon" } else { "polyline" };
                let _ = writeln!(
                    out,
                    r#"  <{tag} class="curve" data-plot="{}" data-formula="{}" points="{}"/>"#,
                    esc(&plot.id),
                    esc(&c.formula),
                    points.join(" ")
                );
            }
        }
    }
    if let Some(hl) = &state.highlight {
        for g in &hl.guides {
            if let Some(s) = &g.segment {
                let _ = writeln!(
                    out,
                    r#"  <line class="guide" data-symbol="{}" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
                    esc(&hl.symbol),
                    n(s.start.0),
                    n(s.start.1),
                    n(s.end.0),
                    n(s.end.1)
                );
            }
        }
        for l in &hl.segments {
            let s = &l.segment;
            let _ = writeln!(
                out,
                r#"  <line class="label" data-label="{}" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
                esc(&l.label),
                n(s.start.0),
                n(s.start.1),
                n(s.end.0),
                n(s.end.1)
            );
        }
    }
    for t in &state.tokens {
        let _ = writeln!(
            out,
            r#"  <circle class="token" data-id="{}" data-variable="{}" cx="{}" cy="{}" r="3"/>"#,
            esc(&t.id),
            esc(&t.variable),
            n(t.anchor.0),
            n(t.anchor.1)
        );
    }
    let mut lines: Vec<(String, String)> = Vec::new();
    for f in &state.formulas {
        if let Some(d) = f.display.as_ref().filter(|_| !f.variables.is_empty()) {
            lines.push(("display".into(), format!("{}: {d}", f.id)));
        }
    }
    for hint in &state.hints {
        match (&hint.message, hint.steps.last()) {
            (Some(m), _) => lines.push(("hint".into(), format!("{}: {m}", hint.formula))),
            (None, Some(last)) => lines.push(("hint".into(), format!("{}: {}", hint.formula, last.relations.join(", ")))),
            (None, None) => {}
        }
    }
    for ex in &state.examples {
        let text = ex.text.as_ref().or(ex.message.as_ref()).cloned().unwrap_or_default();
        lines.push(("example".into(), format!("{}: {text}", ex.formula)));
    }
    if let Some(notice) = &state.notice {
        lines.push(("notice".into(), notice.clone()));
    }
    for (i, (class, text)) in lines.iter().enumerate() {
        let _ = writeln!(out, r#"  <text class="{class}" x="8" y="{}">{}</text>"#, (h as usize).saturating_sub(8 + 16 * (lines.len() - 1 - i)), esc(text));
    }
    out.push_str("</svg>\n");
    out
}
