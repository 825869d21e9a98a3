//! JSON-over-HTTP sessions for browser and scripted clients.
//!
//! Graphs are uploaded once and shared read-only. Each session sits behind
//! its own mutex and its oracle calls run on the blocking pool under a
//! time budget; an overrun leaves the session untouched and answers 503.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use pgipro_core::graph::{GraphDocument, MultiObjectiveGraph, Path};
use pgipro_core::ipro::{IproError, OracleError, Solution};
use pgipro_core::oracle::{GuidanceMode, ModfsOracle};
use pgipro_core::session::{
    Heuristic, InteractionEvent, Preference, Session, SessionError, SessionStatus, SteerRequest, StepOutcome,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::clock::WallClock;
use crate::io::append_json_line;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub session_ttl: Duration,
    pub max_sessions: usize,
    pub oracle_budget: Duration,
    /// Closed sessions' transcripts are appended here as JSON lines.
    pub transcript_log: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            session_ttl: Duration::from_secs(3600),
            max_sessions: 1024,
            oracle_budget: Duration::from_secs(30),
            transcript_log: None,
        }
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into() }
    }

    fn not_found(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("unknown {what} {id:?}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut res = (self.status, Json(json!({ "code": self.code, "message": self.message }))).into_response();
        if self.status == StatusCode::SERVICE_UNAVAILABLE {
            res.headers_mut().insert(header::RETRY_AFTER, HeaderValue::from_static("1"));
        }
        res
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let msg = e.to_string();
        match e {
            SessionError::SessionClosed => Self::new(StatusCode::CONFLICT, "session_closed", msg),
            SessionError::Exhausted => Self::new(StatusCode::CONFLICT, "exhausted", msg),
            SessionError::PendingComparison => Self::new(StatusCode::CONFLICT, "pending_comparison", msg),
            SessionError::NoPendingCandidate => Self::new(StatusCode::CONFLICT, "no_pending_comparison", msg),
            SessionError::InvalidObjective { .. } => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_objective", msg),
            SessionError::Unreachable => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "unreachable", msg),
            SessionError::Ipro(IproError::Oracle(OracleError::Interrupted)) => Self::new(
                StatusCode::SERVICE_UNAVAILABLE,
                "oracle_timeout",
                "the route search exceeded its time budget; retry the request",
            ),
            SessionError::Ipro(_) => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", msg),
        }
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_request", e.to_string()))
}

struct StoredGraph {
    graph: Arc<MultiObjectiveGraph>,
}

struct SessionEntry {
    graph_id: String,
    graph: Arc<MultiObjectiveGraph>,
    source: String,
    target: String,
    session: Mutex<Session<ModfsOracle>>,
    /// Milliseconds since the store's epoch at last use.
    last_used: AtomicU64,
}

pub struct AppState {
    config: ServiceConfig,
    epoch: Instant,
    graphs: RwLock<HashMap<String, Arc<StoredGraph>>>,
    sessions: Mutex<HashMap<String, Arc<SessionEntry>>>,
    log_lock: Mutex<()>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Arc<Self> {
        Arc::new(AppState {
            config,
            epoch: Instant::now(),
            graphs: RwLock::new(HashMap::new()),
            sessions: Mutex::new(HashMap::new()),
            log_lock: Mutex::new(()),
        })
    }

    fn now_ms(&self) -> u64 {
        self.epoch.elapsed().as_millis() as u64
    }

    fn sweep(&self, sessions: &mut HashMap<String, Arc<SessionEntry>>) {
        let now = self.now_ms();
        let ttl = self.config.session_ttl.as_millis() as u64;
        sessions.retain(|_, e| now.saturating_sub(e.last_used.load(Ordering::Relaxed)) < ttl);
    }

    fn session(&self, id: &str) -> ApiResult<Arc<SessionEntry>> {
        let mut sessions = self.sessions.lock().expect("session map lock");
        self.sweep(&mut sessions);
        let entry = sessions.get(id).cloned().ok_or_else(|| ApiError::not_found("session", id))?;
        entry.last_used.store(self.now_ms(), Ordering::Relaxed);
        Ok(entry)
    }

    /// Number of live sessions after expiring idle ones.
    pub fn session_count(&self) -> usize {
        let mut sessions = self.sessions.lock().expect("session map lock");
        self.sweep(&mut sessions);
        sessions.len()
    }

    fn deadline_check(&self) -> Arc<dyn Fn() -> bool + Send + Sync> {
        let deadline = Instant::now() + self.config.oracle_budget;
        Arc::new(move || Instant::now() >= deadline)
    }
}

fn new_id() -> String {
    format!("{:032x}", rand::random::<u128>())
}

#[derive(Debug, Clone, Serialize)]
pub struct ObjectiveValue {
    pub name: String,
    pub unit: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RouteView {
    pub value: Vec<f64>,
    pub objectives: Vec<ObjectiveValue>,
    pub nodes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polyline: Option<Vec<[f64; 2]>>,
    /// Componentwise `value - other.value` against the route it is shown with.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
}

impl RouteView {
    pub fn new(graph: &MultiObjectiveGraph, sol: &Solution<Path>, against: Option<&Solution<Path>>) -> Self {
        let objectives = graph
            .objectives()
            .iter()
            .zip(sol.value.iter())
            .map(|(o, &value)| ObjectiveValue { name: o.name.clone(), unit: o.unit.clone(), value })
            .collect();
        let coords: Option<Vec<[f64; 2]>> = sol
            .payload
            .nodes
            .iter()
            .map(|&n| graph.node(n).coordinate.map(|c| [c.lon, c.lat]))
            .collect();
        RouteView {
            value: sol.value.as_slice().to_vec(),
            objectives,
            nodes: sol.payload.node_ids(graph).into_iter().map(String::from).collect(),
            polyline: coords,
            deltas: against.map(|o| sol.value.iter().zip(o.value.iter()).map(|(a, b)| a - b).collect()),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    graph_id: String,
    source: String,
    target: String,
    #[serde(default)]
    heuristic: Heuristic,
    #[serde(default)]
    guidance: GuidanceMode,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Choose {
    preferred: Preference,
}

#[derive(Serialize)]
struct TranscriptRecord<'a> {
    session_id: &'a str,
    graph_id: &'a str,
    source: &'a str,
    target: &'a str,
    heuristic: Heuristic,
    best: Vec<f64>,
    transcript: &'a [InteractionEvent],
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/graphs", post(upload_graph))
        .route("/graphs/{id}", get(get_graph))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/steer", post(steer))
        .route("/sessions/{id}/choose", post(choose))
        .route("/sessions/{id}/close", post(close))
        .with_state(state)
}

pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(config.listen).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(config)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn upload_graph(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    let doc: GraphDocument = parse_body(&body)?;
    let graph = MultiObjectiveGraph::from_document(doc)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_graph", e.to_string()))?;
    let id = new_id();
    let summary = json!({
        "graph_id": id,
        "nodes": graph.node_count(),
        "edges": graph.edge_count(),
        "objectives": graph.objectives(),
    });
    state
        .graphs
        .write()
        .expect("graph map lock")
        .insert(id, Arc::new(StoredGraph { graph: Arc::new(graph) }));
    Ok((StatusCode::CREATED, Json(summary)))
}

async fn get_graph(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<GraphDocument>> {
    let graphs = state.graphs.read().expect("graph map lock");
    let stored = graphs.get(&id).ok_or_else(|| ApiError::not_found("graph", &id))?;
    Ok(Json(stored.graph.to_document()))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

async fn create_session(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    let req: CreateSession = parse_body(&body)?;
    let graph = {
        let graphs = state.graphs.read().expect("graph map lock");
        graphs.get(&req.graph_id).ok_or_else(|| ApiError::not_found("graph", &req.graph_id))?.graph.clone()
    };
    let source = graph.lookup(&req.source).ok_or_else(|| ApiError::not_found("node", &req.source))?;
    let target = graph.lookup(&req.target).ok_or_else(|| ApiError::not_found("node", &req.target))?;
    {
        let mut sessions = state.sessions.lock().expect("session map lock");
        state.sweep(&mut sessions);
        if sessions.len() >= state.config.max_sessions {
            return Err(ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "capacity", "too many open sessions"));
        }
    }

    let check = state.deadline_check();
    let g = graph.clone();
    let session = blocking(move || {
        let oracle = ModfsOracle::new(g, source, target, req.guidance)
            .map_err(SessionError::from)?
            .with_interrupt(check);
        let mut session = Session::start_with_clock(oracle, req.heuristic, Box::new(WallClock::new()))?;
        session.oracle_mut().set_interrupt(None);
        Ok(session)
    })
    .await?;

    let id = new_id();
    let initial = RouteView::new(&graph, session.current(), None);
    let entry = Arc::new(SessionEntry {
        graph_id: req.graph_id,
        graph,
        source: req.source,
        target: req.target,
        session: Mutex::new(session),
        last_used: AtomicU64::new(state.now_ms()),
    });
    state.sessions.lock().expect("session map lock").insert(id.clone(), entry);
    Ok((
        StatusCode::CREATED,
        Json(json!({ "session_id": id, "status": SessionStatus::Active, "initial": initial, "best": initial })),
    ))
}

fn snapshot(id: &str, entry: &SessionEntry, session: &Session<ModfsOracle>) -> serde_json::Value {
    let g = &entry.graph;
    let best = RouteView::new(g, session.best(), None);
    let candidate = session
        .has_pending()
        .then(|| RouteView::new(g, session.current(), Some(session.best())));
    json!({
        "session_id": id,
        "graph_id": entry.graph_id,
        "source": entry.source,
        "target": entry.target,
        "status": session.status(),
        "heuristic": session.heuristic(),
        "pending": session.has_pending(),
        "best": best,
        "current": RouteView::new(g, session.current(), None),
        "candidate": candidate,
        "transcript": session.transcript(),
    })
}

async fn get_session(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<serde_json::Value>> {
    let entry = state.session(&id)?;
    let session = entry.session.lock().expect("session lock");
    Ok(Json(snapshot(&id, &entry, &session)))
}

async fn steer(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> ApiResult<Json<serde_json::Value>> {
    let req: SteerRequest = parse_body(&body)?;
    let entry = state.session(&id)?;
    let check = state.deadline_check();
    blocking(move || {
        let mut session = entry.session.lock().expect("session lock");
        session.oracle_mut().set_interrupt(Some(check));
        let outcome = session.steer(req);
        session.oracle_mut().set_interrupt(None);
        let g = &entry.graph;
        Ok(Json(match outcome? {
            StepOutcome::Candidate { candidate, incumbent } => json!({
                "status": session.status(),
                "candidate": RouteView::new(g, &candidate, Some(&incumbent)),
                "incumbent": RouteView::new(g, &incumbent, Some(&candidate)),
            }),
            StepOutcome::Exhausted { best } => json!({
                "status": SessionStatus::Exhausted,
                "best": RouteView::new(g, &best, None),
            }),
        }))
    })
    .await
}

async fn choose(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> ApiResult<Json<serde_json::Value>> {
    let req: Choose = parse_body(&body)?;
    let entry = state.session(&id)?;
    let mut session = entry.session.lock().expect("session lock");
    session.record_comparison(req.preferred)?;
    Ok(Json(json!({
        "status": session.status(),
        "best": RouteView::new(&entry.graph, session.best(), None),
    })))
}

async fn close(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<serde_json::Value>> {
    let entry = state.session(&id)?;
    let mut session = entry.session.lock().expect("session lock");
    let was_open = session.status() != SessionStatus::Closed;
    let best = session.close();
    if was_open {
        if let Some(path) = &state.config.transcript_log {
            let record = TranscriptRecord {
                session_id: &id,
                graph_id: &entry.graph_id,
                source: &entry.source,
                target: &entry.target,
                heuristic: session.heuristic(),
                best: best.value.as_slice().to_vec(),
                transcript: session.transcript(),
            };
            let _guard = state.log_lock.lock().expect("log lock");
            append_json_line(path, &record)
                .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "transcript_write", e.to_string()))?;
        }
    }
    Ok(Json(json!({
        "status": SessionStatus::Closed,
        "best": RouteView::new(&entry.graph, &best, None),
    })))
}
