//! Interpretation sessions over HTTP/JSON.
//!
//! Routes:
//!
//! ```text
//! GET    /catalog               lexicon and world names
//! POST   /sessions              CreateSession -> 201 Created
//! GET    /sessions/{id}         snapshot
//! POST   /sessions/{id}/words   FeedWord -> snapshot
//! POST   /sessions/{id}/undo    snapshot
//! DELETE /sessions/{id}         204
//! ```
//!
//! Failures are `ApiError` bodies: 404 unknown session, 422 unknown word
//! (with suggestions), 409 dead end, blocked session or nothing to undo.

pub mod catalog;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use tokio::net::TcpListener;
use tokio::task::JoinHandle;

use incr_core::api::{ApiError, CreateSession, Created, ErrorKind, FeedWord};
use incr_core::parser::ParserConfig;
use incr_core::report::StateReport;
use incr_core::session::{Session, SessionConfig, SessionError};

pub use catalog::{Catalog, CatalogError};

struct Handle {
    last_used: Mutex<Instant>,
    session: Mutex<Session>,
}

impl Handle {
    fn touch(&self) {
        *self.last_used.lock().unwrap() = Instant::now();
    }
}

pub struct AppState {
    catalog: Catalog,
    sessions: Mutex<HashMap<String, Arc<Handle>>>,
    idle_timeout: Duration,
}

impl AppState {
    pub fn new(catalog: Catalog, idle_timeout: Duration) -> Arc<Self> {
        Arc::new(AppState {
            catalog,
            sessions: Mutex::new(HashMap::new()),
            idle_timeout,
        })
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    /// Drops sessions idle for longer than the timeout; returns how many.
    pub fn sweep(&self) -> usize {
        let mut table = self.sessions.lock().unwrap();
        let before = table.len();
        table.retain(|_, h| h.last_used.lock().unwrap().elapsed() <= self.idle_timeout);
        before - table.len()
    }

    fn handle(&self, id: &str) -> Result<Arc<Handle>, Failure> {
        let h = self
            .sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| Failure(ApiError::new(ErrorKind::UnknownSession, format!("no session `{id}`"))))?;
        h.touch();
        Ok(h)
    }
}

/// An `ApiError` as an HTTP response.
struct Failure(ApiError);

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.0.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self.0)).into_response()
    }
}

impl From<SessionError> for Failure {
    fn from(e: SessionError) -> Self {
        Failure(ApiError::from(&e))
    }
}

impl From<JsonRejection> for Failure {
    fn from(e: JsonRejection) -> Self {
        Failure(ApiError::new(ErrorKind::BadRequest, e.body_text()))
    }
}

/// Runs `f` on the session off the async workers. The session mutex
/// serializes requests to one session.
async fn with_session<T: Send + 'static>(
    h: Arc<Handle>,
    f: impl FnOnce(&mut Session) -> Result<T, SessionError> + Send + 'static,
) -> Result<T, Failure> {
    let out = tokio::task::spawn_blocking(move || {
        let mut s = h.session.lock().unwrap();
        f(&mut s)
    })
    .await
    .expect("session task panicked");
    Ok(out?)
}

async fn catalog(State(st): State<Arc<AppState>>) -> Json<incr_core::api::Catalog> {
    Json(st.catalog.names())
}

async fn create(
    State(st): State<Arc<AppState>>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<(StatusCode, Json<Created>), Failure> {
    let Json(req) = body?;
    let lex = st.catalog.lexicon(&req.lexicon).ok_or_else(|| {
        Failure(ApiError::new(ErrorKind::UnknownLexicon, format!("no lexicon `{}`", req.lexicon)))
    })?;
    let world = st
        .catalog
        .world(&req.world)
        .ok_or_else(|| Failure(ApiError::new(ErrorKind::UnknownWorld, format!("no world `{}`", req.world))))?;
    let cfg = SessionConfig {
        parser: ParserConfig {
            s_modifiers: req.s_modifiers,
            ..ParserConfig::default()
        },
        domain_k: req.domain_k,
    };
    let session = tokio::task::spawn_blocking(move || Session::new(lex, world, cfg))
        .await
        .expect("session task panicked");
    let snapshot = session.snapshot();
    let id = uuid::Uuid::new_v4().simple().to_string();
    st.sessions.lock().unwrap().insert(
        id.clone(),
        Arc::new(Handle {
            last_used: Mutex::new(Instant::now()),
            session: Mutex::new(session),
        }),
    );
    tracing::info!(%id, world = %req.world, "session created");
    Ok((StatusCode::CREATED, Json(Created { id, snapshot })))
}

async fn snapshot(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<StateReport>, Failure> {
    let h = st.handle(&id)?;
    Ok(Json(with_session(h, |s| Ok(s.snapshot())).await?))
}

async fn feed(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<FeedWord>, JsonRejection>,
) -> Result<Json<StateReport>, Failure> {
    let h = st.handle(&id)?;
    let Json(req) = body?;
    Ok(Json(with_session(h, move |s| s.feed_word(&req.word).cloned()).await?))
}

async fn undo(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<StateReport>, Failure> {
    let h = st.handle(&id)?;
    Ok(Json(with_session(h, |s| s.undo_word().cloned()).await?))
}

async fn remove(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> Result<StatusCode, Failure> {
    match st.sessions.lock().unwrap().remove(&id) {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(Failure(ApiError::new(ErrorKind::UnknownSession, format!("no session `{id}`")))),
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/catalog", get(catalog))
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(snapshot).delete(remove))
        .route("/sessions/{id}/words", post(feed))
        .route("/sessions/{id}/undo", post(undo))
        .with_state(state)
}

/// Periodically drops idle sessions.
pub fn spawn_sweeper(state: Arc<AppState>, period: Duration) -> JoinHandle<()> {
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            let n = state.sweep();
            if n > 0 {
                tracing::info!(expired = n, "idle sessions dropped");
            }
        }
    })
}

/// Serves on `listener` until the process ends.
pub async fn serve(listener: TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    let period = (state.idle_timeout / 4).max(Duration::from_millis(50));
    let sweeper = spawn_sweeper(state.clone(), period);
    let res = axum::serve(listener, router(state)).await;
    sweeper.abort();
    res
}
