//! HTTP + WebSocket gateway over compiled agents and execution sessions.
//!
//! Routes live under `/api/v1`; see `docs/http-api.md` for payloads.

pub mod model;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
pub use axum::http::HeaderValue;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use indexmap::IndexMap;
use serde::Deserialize;
use serde_json::json;
use tokio::sync::{broadcast, Mutex};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use dialplan_core::executor::{Engine, Snapshot};
use dialplan_core::session::{Session, SessionError, Status};
use dialplan_core::trace::{parse_trace, replay, snapshot_at, ReplayMode, ReplayReport, StepRecord};

use model::{graph, trace_path, AgentSummary, Event, Mode, Progress, SessionView};

pub const EVENT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("{0} not found")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("trace does not replay")]
    Divergent(Box<ReplayReport>),
    #[error("{0}")]
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code) = match &self {
            ApiError::NotFound(_) => (StatusCode::NOT_FOUND, "not-found"),
            ApiError::Conflict(_) => (StatusCode::CONFLICT, "conflict"),
            ApiError::BadRequest(_) => (StatusCode::BAD_REQUEST, "bad-request"),
            ApiError::Divergent(_) => (StatusCode::UNPROCESSABLE_ENTITY, "divergent-trace"),
            ApiError::Internal(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        let mut body = json!({ "error": { "code": code, "message": self.to_string() } });
        if let ApiError::Divergent(r) = &self {
            body["error"]["divergences"] = json!(r.divergences);
        }
        (status, Json(body)).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::NotAwaitingInput(_) => ApiError::Conflict(e.to_string()),
            SessionError::Exec(dialplan_core::executor::ExecError::Complete) => ApiError::Conflict(e.to_string()),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

struct View {
    progress: Progress,
    snapshot: Snapshot,
    trace: Vec<StepRecord>,
}

struct Slot {
    id: String,
    agent: String,
    mode: Mode,
    engine: Arc<Engine>,
    /// Held for the duration of a step; replay sessions have none.
    live: Option<Mutex<Session>>,
    /// Read side, updated after each committed step.
    view: RwLock<View>,
    events: broadcast::Sender<Event>,
}

impl Slot {
    fn view(&self) -> SessionView {
        let v = self.view.read().expect("view lock");
        SessionView {
            id: self.id.clone(),
            agent: self.agent.clone(),
            mode: self.mode,
            progress: v.progress.clone(),
            steps: v.trace.len(),
            snapshot: v.snapshot.clone(),
        }
    }
}

fn progress(s: Status) -> Progress {
    match s {
        Status::Awaiting { action, prompt } => Progress::Awaiting { action, prompt },
        Status::Complete => Progress::Complete,
    }
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    agents: IndexMap<String, Arc<Engine>>,
    sessions: RwLock<HashMap<String, Arc<Slot>>>,
    next: AtomicU64,
}

impl AppState {
    pub fn new(agents: impl IntoIterator<Item = (String, Engine)>) -> Self {
        let agents = agents.into_iter().map(|(k, e)| (k, Arc::new(e))).collect();
        AppState { inner: Arc::new(Inner { agents, sessions: RwLock::default(), next: AtomicU64::new(1) }) }
    }

    fn agent(&self, id: &str) -> Result<&Arc<Engine>, ApiError> {
        self.inner.agents.get(id).ok_or_else(|| ApiError::NotFound(format!("agent {id}")))
    }

    fn session(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        let s = self.inner.sessions.read().expect("sessions lock");
        s.get(id).cloned().ok_or_else(|| ApiError::NotFound(format!("session {id}")))
    }

    fn insert(&self, mode: Mode, agent: &str, engine: Arc<Engine>, live: Option<Session>, view: View) -> Arc<Slot> {
        let n = self.inner.next.fetch_add(1, Ordering::SeqCst);
        let prefix = match mode {
            Mode::Live => "s",
            Mode::Replay => "r",
        };
        let id = format!("{prefix}{n}");
        let (events, _) = broadcast::channel(256);
        let slot = Arc::new(Slot {
            id: id.clone(),
            agent: agent.to_string(),
            mode,
            engine,
            live: live.map(Mutex::new),
            view: RwLock::new(view),
            events,
        });
        self.inner.sessions.write().expect("sessions lock").insert(id, slot.clone());
        slot
    }
}

/// All routes, with CORS for `origin` (any origin when `None`).
pub fn router(state: AppState, origin: Option<HeaderValue>) -> Router {
    let cors = CorsLayer::new().allow_methods(Any).allow_headers(Any).allow_origin(match origin {
        Some(o) => AllowOrigin::exact(o),
        None => AllowOrigin::from(Any),
    });
    Router::new()
        .route("/api/v1/agents", get(list_agents))
        .route("/api/v1/agents/{agent}/graph", get(agent_graph))
        .route("/api/v1/sessions", post(create_session))
        .route("/api/v1/sessions/{id}", get(get_session))
        .route("/api/v1/sessions/{id}/utterances", post(post_utterance))
        .route("/api/v1/sessions/{id}/steps/{k}", get(step_at))
        .route("/api/v1/sessions/{id}/trace", get(get_trace))
        .route("/api/v1/sessions/{id}/events", get(events))
        .route("/api/v1/replays", post(create_replay))
        .layer(cors)
        .with_state(state)
}

pub async fn serve(state: AppState, addr: SocketAddr, origin: Option<HeaderValue>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state, origin)).await
}

async fn list_agents(State(st): State<AppState>) -> Json<Vec<AgentSummary>> {
    Json(
        st.inner
            .agents
            .iter()
            .map(|(id, e)| AgentSummary {
                id: id.clone(),
                name: e.manifest.agent.clone(),
                nodes: e.controller.nodes.len(),
                edges: e.controller.edge_count(),
                actions: e.domain.actions.len(),
            })
            .collect(),
    )
}

async fn agent_graph(State(st): State<AppState>, Path(agent): Path<String>) -> Result<Json<model::Graph>, ApiError> {
    Ok(Json(graph(&agent, st.agent(&agent)?)))
}

#[derive(Deserialize)]
struct CreateSession {
    agent: String,
}

async fn create_session(
    State(st): State<AppState>,
    Json(req): Json<CreateSession>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let engine = st.agent(&req.agent)?.clone();
    let mut session = Session::new(engine.clone());
    let status = session.run()?;
    let view = View { progress: progress(status), snapshot: session.snapshot().clone(), trace: session.trace().to_vec() };
    let slot = st.insert(Mode::Live, &req.agent, engine, Some(session), view);
    Ok((StatusCode::CREATED, Json(slot.view())))
}

async fn get_session(State(st): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    Ok(Json(st.session(&id)?.view()))
}

#[derive(Deserialize)]
struct Utter {
    text: String,
}

async fn post_utterance(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<Utter>,
) -> Result<Json<SessionView>, ApiError> {
    let slot = st.session(&id)?;
    let Some(live) = &slot.live else {
        return Err(ApiError::Conflict(format!("session {id} is a read-only replay")));
    };
    let mut session = live.lock().await;
    let before = session.trace().len();
    let status = session.reply(&req.text);
    // a failed reply may still have committed steps before the failure
    let new: Vec<StepRecord> = session.trace()[before..].to_vec();
    let p = match &status {
        Ok(s) => progress(s.clone()),
        Err(_) => slot.view.read().expect("view lock").progress.clone(),
    };
    {
        let mut v = slot.view.write().expect("view lock");
        v.snapshot = session.snapshot().clone();
        v.trace.extend(new.iter().cloned());
        v.progress = p.clone();
    }
    for r in new {
        let _ = slot.events.send(Event::Step {
            v: EVENT_VERSION,
            session: id.clone(),
            record: Box::new(r),
            progress: p.clone(),
        });
    }
    status?;
    Ok(Json(slot.view()))
}

async fn step_at(State(st): State<AppState>, Path((id, k)): Path<(String, usize)>) -> Result<Json<Snapshot>, ApiError> {
    let slot = st.session(&id)?;
    let trace = slot.view.read().expect("view lock").trace.clone();
    if k > trace.len() {
        return Err(ApiError::NotFound(format!("step {k} of session {id} (has {})", trace.len())));
    }
    snapshot_at(&slot.engine, &trace, k).map(Json).map_err(|d| ApiError::Internal(d.message))
}

async fn get_trace(State(st): State<AppState>, Path(id): Path<String>) -> Result<Json<serde_json::Value>, ApiError> {
    let slot = st.session(&id)?;
    let trace = slot.view.read().expect("view lock").trace.clone();
    let path = trace_path(slot.engine.controller.n0, &trace);
    Ok(Json(json!({ "session": id, "records": trace, "path": path })))
}

#[derive(Deserialize)]
struct CreateReplay {
    agent: String,
    /// Trace log contents, one JSON record per line.
    trace: String,
}

async fn create_replay(
    State(st): State<AppState>,
    Json(req): Json<CreateReplay>,
) -> Result<(StatusCode, Json<serde_json::Value>), ApiError> {
    let engine = st.agent(&req.agent)?.clone();
    let records = parse_trace(&req.trace).map_err(|e| ApiError::BadRequest(e.to_string()))?;
    let report = replay(&engine, &records, ReplayMode::Recorded);
    if !report.consistent {
        return Err(ApiError::Divergent(Box::new(report)));
    }
    let view = View { progress: Progress::Closed, snapshot: report.snapshot.clone(), trace: records };
    let slot = st.insert(Mode::Replay, &req.agent, engine, None, view);
    let body = json!({
        "session": slot.view(),
        "report": { "consistent": report.consistent, "steps": report.steps, "divergences": report.divergences, "path": report.path },
    });
    Ok((StatusCode::CREATED, Json(body)))
}

async fn events(
    State(st): State<AppState>,
    Path(id): Path<String>,
    ws: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let slot = st.session(&id)?;
    Ok(ws.on_upgrade(move |socket| forward(socket, slot)))
}

async fn forward(mut socket: WebSocket, slot: Arc<Slot>) {
    let mut rx = slot.events.subscribe();
    let steps = slot.view.read().expect("view lock").trace.len();
    let hello = Event::Hello { v: EVENT_VERSION, session: slot.id.clone(), steps };
    if send(&mut socket, &hello).await.is_err() {
        return;
    }
    loop {
        tokio::select! {
            ev = rx.recv() => match ev {
                Ok(ev) => if send(&mut socket, &ev).await.is_err() { return },
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => return,
            },
            msg = socket.recv() => match msg {
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                Some(Ok(_)) => {}
            },
        }
    }
}

async fn send(socket: &mut WebSocket, ev: &Event) -> Result<(), axum::Error> {
    let text = serde_json::to_string(ev).expect("events serialize");
    socket.send(Message::Text(text.into())).await
}
