#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use augmath::doc::{PageModel, IngestConfig};
use augmath_gateway::cli::{extract, read_document};
use augmath_gateway::service::{router, AppState};
use axum::body::{Body, Bytes};
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use tower::ServiceExt;

pub struct Fixture {
    pub bundle: PathBuf,
    pub doc_path: PathBuf,
    pub doc: PageModel,
    _dir: tempfile::TempDir,
}

/// The walkthrough bundle, extracted once per test binary.
pub fn fixture() -> &'static Fixture {
    static FIXTURE: OnceLock<Fixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let bundle = dir.path().join("bundle");
        augmath::doc::write_walkthrough_bundle(&bundle).unwrap();
        let doc_path = dir.path().join("out").join("doc.json");
        extract(&bundle, &doc_path, &IngestConfig::default()).unwrap();
        let doc = read_document(&doc_path).unwrap();
        Fixture { bundle, doc_path, doc, _dir: dir }
    })
}

pub fn app() -> Router {
    let f = fixture();
    router(Arc::new(AppState::new(f.doc.clone(), f.doc_path.parent().unwrap().to_path_buf(), None)))
}

pub async fn send(app: &Router, method: Method, uri: &str, body: impl Into<Body>) -> (StatusCode, Bytes) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.into())
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes())
}

pub async fn create(app: &Router) -> String {
    let (status, body) = send(app, Method::POST, "/api/sessions", Body::empty()).await;
    assert_eq!(status, StatusCode::CREATED);
    let v: serde_json::Value = serde_json::from_slice(&body).unwrap();
    v["session"].as_str().unwrap().to_string()
}

pub async fn post_event(app: &Router, id: &str, event: &serde_json::Value) -> (StatusCode, Bytes) {
    send(app, Method::POST, &format!("/api/sessions/{id}/events"), serde_json::to_vec(event).unwrap()).await
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// Golden scripts by file stem, sorted.
pub fn golden_scripts() -> Vec<(String, Vec<serde_json::Value>)> {
    let mut out: Vec<_> = std::fs::read_dir(golden_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .map(|p| {
            let events = serde_json::from_slice(&std::fs::read(&p).unwrap()).unwrap();
            (p.file_stem().unwrap().to_string_lossy().into_owned(), events)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// The protocol schema with its root pointed at one `$defs` entry.
pub fn validator(def: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/protocol/protocol.schema.json");
    let mut schema: serde_json::Value = serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap();
    schema["$ref"] = serde_json::Value::String(format!("#/$defs/{def}"));
    jsonschema::validator_for(&schema).unwrap()
}

pub fn assert_valid(validator: &jsonschema::Validator, instance: &serde_json::Value) {
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "schema violations: {errors:#?}");
}
