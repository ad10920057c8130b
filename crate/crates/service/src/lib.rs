//! HTTP assistant: a human relays the feedback of a real game turn by turn and
//! the service answers with the solver's next guess.
//!
//! Codes travel as 1-based digit strings (`"1123"`), feedback as explicit
//! `bulls`/`cows` integers. Sessions live in memory and expire after an idle
//! period.

pub mod session;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use mastermind_core::{named_policy, Error, GameParams};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;

use session::{Session, Status};

pub const DEFAULT_TTL: Duration = Duration::from_secs(60 * 60);
pub const DEFAULT_POLICY: &str = "staged-paper";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Idle time after which a session is dropped.
    pub ttl: Duration,
    /// Directory holding the built UI, served at `/`.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            ttl: DEFAULT_TTL,
            static_dir: None,
        }
    }
}

type Shared = Arc<Mutex<Session>>;

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<String, Shared>>>,
    ttl: Duration,
}

impl AppState {
    pub fn new(ttl: Duration) -> Self {
        AppState {
            sessions: Arc::default(),
            ttl,
        }
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().expect("session map").len()
    }

    fn sweep(&self, now: Instant) {
        let ttl = self.ttl;
        self.sessions.lock().expect("session map").retain(|_, s| {
            // a session busy in another request is in use, so not idle
            s.try_lock()
                .map(|s| now.duration_since(s.last_used) < ttl)
                .unwrap_or(true)
        });
    }

    fn get(&self, id: &str) -> Result<Shared, ApiError> {
        self.sweep(Instant::now());
        self.sessions
            .lock()
            .expect("session map")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("unknown session `{id}`")))
    }

    fn insert(&self, session: Session) {
        self.sweep(Instant::now());
        let id = session.id.clone();
        self.sessions
            .lock()
            .expect("session map")
            .insert(id, Arc::new(Mutex::new(session)));
    }

    fn remove(&self, id: &str) -> bool {
        self.sessions.lock().expect("session map").remove(id).is_some()
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }

    fn conflict(message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidCode(_) | Error::InvalidFeedback(_) => StatusCode::BAD_REQUEST,
            Error::UnknownPolicy(_) | Error::UnknownWeights(_) => StatusCode::NOT_FOUND,
            Error::InvariantViolation(_) => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Deserialize)]
struct CreateRequest {
    policy: Option<String>,
}

#[derive(Debug, Serialize)]
struct CreateResponse {
    id: String,
    policy: String,
    suggestion: Option<String>,
    remaining: usize,
    turn: u32,
}

#[derive(Debug, Deserialize)]
struct FeedbackRequest {
    bulls: u8,
    cows: u8,
    /// The guess actually played, when it differs from the suggestion.
    guess: Option<String>,
}

#[derive(Debug, Serialize)]
struct StepResponse {
    status: Status,
    suggestion: Option<String>,
    remaining: usize,
    turn: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
}

#[derive(Debug, Serialize)]
struct HistoryRow {
    guess: String,
    bulls: u8,
    cows: u8,
    remaining: usize,
}

#[derive(Debug, Serialize)]
struct SessionView {
    id: String,
    policy: String,
    status: Status,
    turn: u32,
    suggestion: Option<String>,
    remaining: usize,
    history: Vec<HistoryRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
}

#[derive(Debug, Deserialize)]
struct CandidatesQuery {
    limit: Option<usize>,
}

#[derive(Debug, Serialize)]
struct CandidatesResponse {
    codes: Vec<String>,
    total: usize,
}

#[derive(Debug, Deserialize)]
struct WhatIfRequest {
    guess: String,
}

const P: GameParams = GameParams::STANDARD;
const DEFAULT_CANDIDATE_LIMIT: usize = 50;

fn step(s: &Session) -> StepResponse {
    StepResponse {
        status: s.status(),
        suggestion: s.suggestion().map(|c| P.format_code(c)),
        remaining: s.remaining().len(),
        turn: s.turn(),
        message: s.message(),
    }
}

fn view(s: &Session) -> SessionView {
    SessionView {
        id: s.id.clone(),
        policy: s.policy_name.clone(),
        status: s.status(),
        turn: s.turn(),
        suggestion: s.suggestion().map(|c| P.format_code(c)),
        remaining: s.remaining().len(),
        history: s
            .history()
            .iter()
            .map(|e| HistoryRow {
                guess: P.format_code(e.guess),
                bulls: e.feedback.bulls,
                cows: e.feedback.cows,
                remaining: e.remaining_after,
            })
            .collect(),
        message: s.message(),
    }
}

/// Runs `f` on the session while holding its lock, marking it used.
fn with_session<T>(
    state: &AppState,
    id: &str,
    f: impl FnOnce(&mut Session) -> Result<T, ApiError>,
) -> Result<T, ApiError> {
    let shared = state.get(id)?;
    let mut s = shared.lock().expect("session lock");
    s.last_used = Instant::now();
    f(&mut s)
}

async fn create(
    State(state): State<AppState>,
    body: Result<Json<CreateRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<CreateResponse>), ApiError> {
    let Json(req) = body?;
    let name = req.policy.unwrap_or_else(|| DEFAULT_POLICY.to_string());
    let policy = named_policy(&name)?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let session = Session::new(id.clone(), name.clone(), policy)?;
    let resp = CreateResponse {
        id,
        policy: name,
        suggestion: session.suggestion().map(|c| P.format_code(c)),
        remaining: session.remaining().len(),
        turn: session.turn(),
    };
    state.insert(session);
    Ok((StatusCode::CREATED, Json(resp)))
}

async fn feedback(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<FeedbackRequest>, JsonRejection>,
) -> ApiResult<StepResponse> {
    let Json(req) = body?;
    let fb = P.feedback(req.bulls, req.cows)?;
    let guess = req.guess.as_deref().map(|g| P.parse_code(g)).transpose()?;
    with_session(&state, &id, |s| {
        if s.status() != Status::Active {
            return Err(ApiError::conflict(format!(
                "session is {}; undo to continue",
                json!(s.status()).as_str().unwrap_or_default()
            )));
        }
        s.submit(guess, fb)?;
        Ok(Json(step(s)))
    })
}

async fn undo(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<StepResponse> {
    with_session(&state, &id, |s| {
        if !s.undo()? {
            return Err(ApiError::conflict("nothing to undo"));
        }
        Ok(Json(step(s)))
    })
}

async fn show(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<SessionView> {
    with_session(&state, &id, |s| Ok(Json(view(s))))
}

async fn candidates(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<CandidatesQuery>,
) -> ApiResult<CandidatesResponse> {
    let limit = q.limit.unwrap_or(DEFAULT_CANDIDATE_LIMIT);
    with_session(&state, &id, |s| {
        Ok(Json(CandidatesResponse {
            codes: s
                .remaining()
                .iter()
                .take(limit)
                .map(|&c| P.format_code(c))
                .collect(),
            total: s.remaining().len(),
        }))
    })
}

async fn what_if(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<WhatIfRequest>, JsonRejection>,
) -> ApiResult<session::WhatIf> {
    let Json(req) = body?;
    let guess = P.parse_code(&req.guess)?;
    with_session(&state, &id, |s| {
        if s.status() != Status::Active {
            return Err(ApiError::conflict("session is not active"));
        }
        Ok(Json(s.what_if(guess)?))
    })
}

async fn delete(State(state): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    if state.remove(&id) {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::not_found(format!("unknown session `{id}`")))
    }
}

async fn api_fallback() -> ApiError {
    ApiError::not_found("no such endpoint")
}

const PLACEHOLDER: &str = "<!doctype html>\n<title>Mastermind assistant</title>\n\
<p>The assistant UI is not built. The JSON API is served under <code>/api</code>.</p>\n";

pub fn router(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(show).delete(delete))
        .route("/sessions/{id}/feedback", post(feedback))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/candidates", get(candidates))
        .route("/sessions/{id}/what-if", post(what_if))
        .fallback(api_fallback)
        .with_state(state);
    let app = Router::new().nest("/api", api);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.route("/", get(|| async { Html(PLACEHOLDER) })),
    }
}

pub fn app(config: &ServiceConfig) -> Router {
    router(AppState::new(config.ttl), config.static_dir.clone())
}

pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, app(&config)).await
}
