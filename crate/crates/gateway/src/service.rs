//! The session service: many independent sessions over one document, each
//! with a single logical writer.
//!
//! | method | path | |
//! |---|---|---|
//! | GET | `/api/document` | the document JSON |
//! | GET | `/api/regions` | formula and figure regions |
//! | POST | `/api/sessions` | create a session (201, revision 0 state) |
//! | GET | `/api/sessions/{id}` | latest state |
//! | POST | `/api/sessions/{id}/events` | apply one event |
//! | GET | `/api/sessions/{id}/stream` | server-sent `state` events, one per revision |
//! | GET | `/document/*` | files next to the document (page image) |
//! | GET | `/*` | UI assets, when an asset directory is configured |

use std::collections::HashMap;
use std::convert::Infallible;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use augmath::doc::{save_document, PageModel};
use augmath::session::{Session, SessionOptions};
use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event as SseEvent, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use futures::stream::{self, Stream, StreamExt};
use tokio::sync::{broadcast, Mutex};
use tower_http::services::ServeDir;

use crate::protocol::{parse_event, state_message, ErrorDetail, Regions};

/// Environment variable naming the UI asset directory.
pub const ASSETS_ENV: &str = "AUGMATH_ASSETS";

const PUSH_CAPACITY: usize = 256;

/// Immutable view of one revision.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub revision: u64,
    pub state_json: Arc<[u8]>,
}

struct SessionSlot {
    writer: Mutex<Session>,
    latest: RwLock<Snapshot>,
    pushes: broadcast::Sender<Snapshot>,
}

pub struct AppState {
    doc: Arc<PageModel>,
    doc_json: Bytes,
    doc_dir: PathBuf,
    assets: Option<PathBuf>,
    options: SessionOptions,
    sessions: RwLock<HashMap<String, Arc<SessionSlot>>>,
    next_id: AtomicU64,
}

impl AppState {
    /// `doc_dir` holds the files the document refers to (its page image).
    pub fn new(doc: PageModel, doc_dir: PathBuf, assets: Option<PathBuf>) -> Self {
        AppState {
            doc_json: Bytes::from(save_document(&doc)),
            doc: Arc::new(doc),
            doc_dir,
            assets,
            options: SessionOptions::default(),
            sessions: RwLock::new(HashMap::new()),
            next_id: AtomicU64::new(1),
        }
    }

    fn slot(&self, id: &str) -> Option<Arc<SessionSlot>> {
        self.sessions.read().expect("session table lock").get(id).cloned()
    }
}

fn json(status: StatusCode, body: Vec<u8>) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error(status: StatusCode, detail: ErrorDetail) -> Response {
    json(status, detail.body())
}

fn unknown_session(id: &str) -> Response {
    error(StatusCode::NOT_FOUND, ErrorDetail::new("unknown_session", format!("no session {id}")))
}

pub fn router(app: Arc<AppState>) -> Router {
    let mut router = Router::new()
        .route("/api/document", get(document))
        .route("/api/regions", get(regions))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_state))
        .route("/api/sessions/{id}/events", post(post_event))
        .route("/api/sessions/{id}/stream", get(stream_states))
        .nest_service("/document", ServeDir::new(&app.doc_dir));
    if let Some(dir) = &app.assets {
        router = router.fallback_service(ServeDir::new(dir));
    }
    router.with_state(app)
}

async fn document(State(app): State<Arc<AppState>>) -> Response {
    json(StatusCode::OK, app.doc_json.to_vec())
}

async fn regions(State(app): State<Arc<AppState>>) -> Response {
    json(StatusCode::OK, serde_json::to_vec(&Regions::of(&app.doc)).expect("regions serialize"))
}

async fn create_session(State(app): State<Arc<AppState>>) -> Response {
    let id = format!("s{}", app.next_id.fetch_add(1, Ordering::Relaxed));
    let session = Session::new(Arc::clone(&app.doc), app.options);
    let snapshot = Snapshot { revision: 0, state_json: session.state_json().into() };
    let body = state_message(&id, 0, &snapshot.state_json);
    let slot = SessionSlot {
        writer: Mutex::new(session),
        latest: RwLock::new(snapshot),
        pushes: broadcast::channel(PUSH_CAPACITY).0,
    };
    app.sessions.write().expect("session table lock").insert(id, Arc::new(slot));
    json(StatusCode::CREATED, body)
}

async fn get_state(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    let Some(slot) = app.slot(&id) else { return unknown_session(&id) };
    let snap = slot.latest.read().expect("snapshot lock").clone();
    json(StatusCode::OK, state_message(&id, snap.revision, &snap.state_json))
}

async fn post_event(State(app): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> Response {
    let Some(slot) = app.slot(&id) else { return unknown_session(&id) };
    let event = match parse_event(&body) {
        Ok(e) => e,
        Err(detail) => return error(StatusCode::BAD_REQUEST, detail),
    };
    // the fair mutex queues writers in arrival order
    let mut session = slot.writer.lock().await;
    match session.apply(event) {
        Ok(outcome) => {
            let snap = Snapshot { revision: outcome.revision, state_json: session.state_json().into() };
            *slot.latest.write().expect("snapshot lock") = snap.clone();
            let _ = slot.pushes.send(snap.clone());
            json(StatusCode::OK, state_message(&id, snap.revision, &snap.state_json))
        }
        Err(e) => error(StatusCode::UNPROCESSABLE_ENTITY, ErrorDetail::rejected(&e, session.revision())),
    }
}

async fn stream_states(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    let Some(slot) = app.slot(&id) else { return unknown_session(&id) };
    Sse::new(revisions(id, &slot)).keep_alive(KeepAlive::default()).into_response()
}

/// The current snapshot, then every later revision in order. A subscriber
/// that falls more than the channel capacity behind skips to newer states.
fn revisions(id: String, slot: &SessionSlot) -> impl Stream<Item = Result<SseEvent, Infallible>> {
    let rx = slot.pushes.subscribe();
    let first = slot.latest.read().expect("snapshot lock").clone();
    let later = stream::unfold(rx, |mut rx| async move {
        loop {
            match rx.recv().await {
                Ok(snap) => return Some((snap, rx)),
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    });
    let mut last = None;
    stream::once(async move { first })
        .chain(later)
        .filter(move |snap| {
            let fresh = last.is_none_or(|r| snap.revision > r);
            if fresh {
                last = Some(snap.revision);
            }
            async move { fresh }
        })
        .map(move |snap| {
            let data = String::from_utf8(state_message(&id, snap.revision, &snap.state_json)).expect("JSON is UTF-8");
            Ok(SseEvent::default().event("state").id(snap.revision.to_string()).data(data))
        })
}

/// Binds and serves until the process ends.
pub async fn serve(app: Arc<AppState>, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("serving on http://{}", listener.local_addr()?);
    axum::serve(listener, router(app)).await
}
