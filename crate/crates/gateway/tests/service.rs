mod common;

use axum::body::Body;
use axum::http::{Method, StatusCode};
use common::*;
use futures::future::join_all;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn parse(body: &[u8]) -> Value {
    serde_json::from_slice(body).unwrap()
}

#[tokio::test]
async fn create_returns_revision_zero_state() {
    let app = app();
    let (status, body) = send(&app, Method::POST, "/api/sessions", Body::empty()).await;
    assert_eq!(status, StatusCode::CREATED);
    let msg = parse(&body);
    assert_eq!(msg["revision"], 0);
    assert_eq!(msg["state"]["revision"], 0);
    assert_eq!(msg["state"]["plots"], json!([]));
    assert_eq!(msg["state"]["formulas"].as_array().unwrap().len(), fixture().doc.formulas.len());
    assert_valid(&validator("StateMessage"), &msg);
    let id = msg["session"].as_str().unwrap();
    let (status, again) = send(&app, Method::GET, &format!("/api/sessions/{id}"), Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(again, body);
}

#[tokio::test]
async fn document_and_regions_endpoints() {
    let app = app();
    let (status, body) = send(&app, Method::GET, "/api/document", Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(augmath::doc::load_document(&body).unwrap(), fixture().doc);
    let (status, body) = send(&app, Method::GET, "/api/regions", Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    let regions = parse(&body);
    assert_valid(&validator("Regions"), &regions);
    assert_eq!(regions["figures"][0]["id"], "g0");
    assert_eq!(regions["figures"][0]["calibrated"], true);
    let image = &fixture().doc.image;
    let (status, body) = send(&app, Method::GET, &format!("/document/{image}"), Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    assert!(!body.is_empty());
}

#[tokio::test]
async fn every_golden_state_matches_the_schema() {
    let state_schema = validator("StateMessage");
    let event_schema = validator("Event");
    for (name, events) in golden_scripts() {
        let app = app();
        let id = create(&app).await;
        for e in &events {
            assert_valid(&event_schema, e);
            let (status, body) = post_event(&app, &id, e).await;
            assert_eq!(status, StatusCode::OK, "{name}");
            assert_valid(&state_schema, &parse(&body));
        }
    }
}

#[tokio::test]
async fn unknown_session_is_404() {
    let app = app();
    let (status, body) = send(&app, Method::GET, "/api/sessions/nope", Body::empty()).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let err = parse(&body);
    assert_eq!(err["error"]["kind"], "unknown_session");
    assert_valid(&validator("ErrorBody"), &err);
    let (status, _) = post_event(&app, "nope", &json!({"op": "set", "variable": "x", "value": 1})).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn malformed_payloads_are_400_with_pointer() {
    let app = app();
    let id = create(&app).await;
    let uri = format!("/api/sessions/{id}/events");
    let cases: [(&str, &str); 5] = [
        (r#"{"op":"set","variable":"b","value":"five"}"#, "/value"),
        (r#"{"op":"promote","formula":"f0","span":{"start":1,"end":"x"}}"#, "/span/end"),
        (r#"{"op":"teleport"}"#, "/op"),
        (r#"{"op":"bind","formula":"f0"}"#, ""),
        (r#"{"op":"set","variable":"b","value":1} trailing"#, ""),
    ];
    let schema = validator("ErrorBody");
    for (body, pointer) in cases {
        let (status, resp) = send(&app, Method::POST, &uri, body).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
        let err = parse(&resp);
        assert_valid(&schema, &err);
        assert_eq!(err["error"]["kind"], "malformed_payload");
        assert_eq!(err["error"]["pointer"], pointer, "{body}");
    }
    let (_, state) = send(&app, Method::GET, &format!("/api/sessions/{id}"), Body::empty()).await;
    assert_eq!(parse(&state)["revision"], 0);
}

#[tokio::test]
async fn rejected_events_are_422_and_change_nothing() {
    let app = app();
    let id = create(&app).await;
    post_event(&app, &id, &json!({"op": "bind", "formula": "f0", "figure": "g0"})).await;
    let (_, before) = send(&app, Method::GET, &format!("/api/sessions/{id}"), Body::empty()).await;
    let schema = validator("ErrorBody");
    let cases = [
        (json!({"op": "set", "variable": "zz", "value": 1}), "unknown_variable"),
        (json!({"op": "bind", "formula": "f7", "figure": "g0"}), "display_only"),
        (json!({"op": "promote", "formula": "f0", "span": {"start": 0, "end": 1}}), "span_not_literal"),
        (json!({"op": "drag", "plot": "p9", "to": [0, 0], "variable": "x"}), "unknown_plot"),
        (json!({"op": "hint", "formula": "f2"}), "feature_unavailable"),
    ];
    for (event, kind) in cases {
        let (status, body) = post_event(&app, &id, &event).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{event}");
        let err = parse(&body);
        assert_valid(&schema, &err);
        assert_eq!(err["error"]["kind"], kind);
        assert_eq!(err["error"]["revision"], 1);
    }
    let (_, after) = send(&app, Method::GET, &format!("/api/sessions/{id}"), Body::empty()).await;
    assert_eq!(before, after);
}

#[tokio::test]
async fn sessions_are_isolated() {
    let app = app();
    let a = create(&app).await;
    let b = create(&app).await;
    assert_ne!(a, b);
    post_event(&app, &a, &json!({"op": "bind", "formula": "f4", "figure": "g0"})).await;
    post_event(&app, &a, &json!({"op": "set", "variable": "r", "value": 3})).await;
    let (_, body) = send(&app, Method::GET, &format!("/api/sessions/{b}"), Body::empty()).await;
    let msg = parse(&body);
    assert_eq!(msg["revision"], 0);
    assert_eq!(msg["state"]["variables"], json!([]));
    let (_, body) = send(&app, Method::GET, &format!("/api/sessions/{a}"), Body::empty()).await;
    assert_eq!(parse(&body)["revision"], 2);
}

/// Reads SSE frames until `count` `state` events have arrived.
async fn read_states(body: &mut Body, count: usize) -> Vec<Value> {
    let mut buf = String::new();
    let mut out = Vec::new();
    while out.len() < count {
        let frame = body.frame().await.expect("stream ended").unwrap();
        let Ok(data) = frame.into_data() else { continue };
        buf.push_str(std::str::from_utf8(&data).unwrap());
        while let Some(end) = buf.find("\n\n") {
            let record: String = buf.drain(..end + 2).collect();
            let mut id = None;
            let mut payload = None;
            let mut is_state = false;
            for line in record.lines() {
                if line == "event: state" {
                    is_state = true;
                } else if let Some(v) = line.strip_prefix("id: ") {
                    id = Some(v.parse::<u64>().unwrap());
                } else if let Some(v) = line.strip_prefix("data: ") {
                    payload = Some(parse(v.as_bytes()));
                }
            }
            if is_state {
                let msg = payload.unwrap();
                assert_eq!(msg["revision"].as_u64(), id);
                out.push(msg);
            }
        }
    }
    out
}

async fn open_stream(app: &axum::Router, id: &str) -> Body {
    let req = axum::http::Request::get(format!("/api/sessions/{id}/stream")).body(Body::empty()).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    assert_eq!(resp.headers()["content-type"], "text/event-stream");
    resp.into_body()
}

#[tokio::test]
async fn stream_starts_with_the_current_state() {
    let app = app();
    let id = create(&app).await;
    let mut stream = open_stream(&app, &id).await;
    let first = read_states(&mut stream, 1).await;
    assert_eq!(first[0]["revision"], 0);
    let (_, body) = post_event(&app, &id, &json!({"op": "bind", "formula": "f0", "figure": "g0"})).await;
    let next = read_states(&mut stream, 1).await;
    assert_eq!(next[0], parse(&body));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_storm_yields_every_revision_once_in_order() {
    let app = app();
    let id = create(&app).await;
    post_event(&app, &id, &json!({"op": "bind", "formula": "f4", "figure": "g0"})).await;
    let mut stream = open_stream(&app, &id).await;
    let posts = (0..100).map(|i| {
        let (app, id) = (app.clone(), id.clone());
        tokio::spawn(async move {
            let value = -5.0 + (i as f64) / 10.0;
            post_event(&app, &id, &json!({"op": "set", "variable": "h", "value": value})).await
        })
    });
    let mut revisions: Vec<u64> = join_all(posts)
        .await
        .into_iter()
        .map(|r| {
            let (status, body) = r.unwrap();
            assert_eq!(status, StatusCode::OK);
            parse(&body)["revision"].as_u64().unwrap()
        })
        .collect();
    revisions.sort_unstable();
    assert_eq!(revisions, (2..=101).collect::<Vec<_>>());
    let pushed: Vec<u64> =
        read_states(&mut stream, 101).await.iter().map(|m| m["revision"].as_u64().unwrap()).collect();
    assert_eq!(pushed, (1..=101).collect::<Vec<_>>());
}
