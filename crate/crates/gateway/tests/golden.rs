mod common;

use std::sync::Arc;

use augmath::session::{Event, Session, SessionOptions};
use augmath_gateway::cli::run_script;
use augmath_gateway::protocol::state_message;
use augmath_gateway::svg::render_svg;
use axum::http::StatusCode;
use common::*;

fn offline(events: &[serde_json::Value]) -> Session {
    let events: Vec<Event> = events.iter().map(|e| serde_json::from_value(e.clone()).unwrap()).collect();
    run_script(fixture().doc.clone(), &events).unwrap()
}

#[tokio::test]
async fn offline_and_online_states_are_byte_equal() {
    let scripts = golden_scripts();
    assert_eq!(scripts.len(), 5);
    for (name, events) in scripts {
        let app = app();
        let id = create(&app).await;
        let mut last = None;
        for (i, e) in events.iter().enumerate() {
            let (status, body) = post_event(&app, &id, e).await;
            assert_eq!(status, StatusCode::OK, "{name} event {i}: {}", String::from_utf8_lossy(&body));
            last = Some(body);
        }
        let session = offline(&events);
        let expected = state_message(&id, session.revision(), &session.state_json());
        assert_eq!(last.unwrap().as_ref(), expected.as_slice(), "{name}");
    }
}

#[test]
fn svg_golden_for_bind_and_set() {
    let session = offline(&serde_json::from_str::<Vec<_>>(
        r#"[{"op":"bind","formula":"f0","figure":"g0"},{"op":"bind","formula":"f4","figure":"g0"},
            {"op":"set","variable":"h","value":-3},{"op":"set","variable":"k","value":4},
            {"op":"set","variable":"r","value":2}]"#,
    )
    .unwrap());
    let svg = render_svg(&session.render_state());
    let path = golden_dir().join("bind_set.svg");
    if std::env::var_os("UPDATE_GOLDENS").is_some() {
        std::fs::write(&path, &svg).unwrap();
    }
    let golden = std::fs::read_to_string(&path).expect("golden SVG missing; run with UPDATE_GOLDENS=1");
    assert_eq!(svg, golden);
    for f in ["f0", "f4"] {
        let needle = format!(r#"class="curve" data-plot="p0" data-formula="{f}""#);
        assert_eq!(svg.matches(&needle).count(), 1, "{f}");
    }
    assert!(svg.contains(r#"<polygon class="curve" data-plot="p0" data-formula="f4""#));
    assert!(svg.contains("f4: \\sqrt{(x + 3)^{2} + (y - 4)^{2}} = 2"));
}

#[test]
fn empty_script_renders_regions_only() {
    let session = offline(&[]);
    assert_eq!(session.revision(), 0);
    let svg = render_svg(&session.render_state());
    assert!(!svg.contains("class=\"curve\""));
    assert!(!svg.contains("<text"));
    let doc = &fixture().doc;
    let boxed = doc.formulas.iter().filter(|f| f.bbox.is_some()).count();
    assert_eq!(svg.matches("<rect class=\"formula\"").count() + svg.matches("<rect class=\"display-only\"").count(), boxed);
    assert_eq!(svg.matches("<rect class=\"figure\"").count(), doc.figures.len());
    assert_eq!(svg.matches("<rect class=\"unmatched\"").count(), doc.unmatched_boxes.len());
}

#[test]
fn snapshots_are_deterministic() {
    for (name, events) in golden_scripts() {
        let a = offline(&events);
        let b = offline(&events);
        assert_eq!(a.state_json(), b.state_json(), "{name}");
        assert_eq!(render_svg(&a.render_state()), render_svg(&b.render_state()), "{name}");
        let fresh = Session::replay(Arc::new(fixture().doc.clone()), SessionOptions::default(), a.log()).unwrap();
        assert_eq!(fresh.state_json(), a.state_json(), "{name}");
    }
}
