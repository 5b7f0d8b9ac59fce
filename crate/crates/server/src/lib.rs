//! HTTP/JSON match server. Teams join with a name and receive a bearer
//! token; admin routes require the server's admin secret as bearer token.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use roboviz_core::engine::{Ack, Drop, MatchLog, PublicSnapshot};
use roboviz_core::matchgen::load_match;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

pub mod error;
pub mod session;

pub use error::ApiError;
pub use session::{Mode, Session, SharedSession, Status};

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub admin_secret: String,
    pub default_tick_seconds: f64,
    /// Where match logs are persisted, one `<match_id>.ndjson` per match.
    pub log_dir: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            admin_secret: String::new(),
            default_tick_seconds: 6.0,
            log_dir: None,
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    config: ServerConfig,
    sessions: RwLock<HashMap<String, SharedSession>>,
    next_id: AtomicU64,
}

impl AppState {
    pub fn new(config: ServerConfig) -> Self {
        Self {
            inner: Arc::new(Inner {
                config,
                sessions: RwLock::new(HashMap::new()),
                next_id: AtomicU64::new(1),
            }),
        }
    }

    pub fn session(&self, id: &str) -> Result<SharedSession, ApiError> {
        self.inner
            .sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("unknown match `{id}`")))
    }

    fn check_admin(&self, headers: &HeaderMap) -> Result<(), ApiError> {
        match bearer(headers) {
            Some(t) if !self.inner.config.admin_secret.is_empty() && t == self.inner.config.admin_secret => {
                Ok(())
            }
            _ => Err(ApiError::unauthorized()),
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/matches", post(create_match))
        .route("/matches/{id}/join", post(join))
        .route("/matches/{id}/start", post(start))
        .route("/matches/{id}/step", post(step))
        .route("/matches/{id}/public", get(public))
        .route("/matches/{id}/bid", post(bid))
        .route("/matches/{id}/interests", post(interests))
        .route("/matches/{id}/drops", get(drops))
        .route("/matches/{id}/log", get(log))
        .with_state(state)
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, config: ServerConfig) -> std::io::Result<()> {
    axum::serve(listener, router(AppState::new(config))).await
}

fn bearer(headers: &HeaderMap) -> Option<&str> {
    headers
        .get(header::AUTHORIZATION)?
        .to_str()
        .ok()?
        .strip_prefix("Bearer ")
        .map(str::trim)
}

/// Every payload problem, syntax or shape, is a 422.
fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::invalid(format!("malformed payload: {e}")))
}

/// Resolves the bearer token to a team of this session.
fn team_of(session: &Session, headers: &HeaderMap) -> Result<String, ApiError> {
    bearer(headers)
        .and_then(|t| session.team_for(t))
        .map(str::to_string)
        .ok_or_else(ApiError::unauthorized)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateMatch {
    pub match_dir: PathBuf,
    #[serde(default)]
    pub mode: Mode,
    pub tick_seconds: Option<f64>,
    #[serde(default)]
    pub engine_seed: u64,
    pub match_id: Option<String>,
    /// Persisted log to resume from instead of starting a lobby.
    pub resume_log: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Created {
    pub match_id: String,
    pub match_hash: String,
    pub status: Status,
    /// Fresh tokens per team, present only when resuming.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<HashMap<String, String>>,
}

async fn create_match(
    State(app): State<AppState>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Json<Created>, ApiError> {
    app.check_admin(&headers)?;
    let req: CreateMatch = parse(&body)?;
    let tick_seconds = req.tick_seconds.unwrap_or(app.inner.config.default_tick_seconds);
    if !(tick_seconds.is_finite() && tick_seconds > 0.0) {
        return Err(ApiError::invalid("tick_seconds must be positive"));
    }
    let id = match req.match_id {
        Some(id) if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') => {
            return Err(ApiError::invalid("match_id may only use letters, digits, `-` and `_`"));
        }
        Some(id) => id,
        None => format!("m{}", app.inner.next_id.fetch_add(1, Ordering::Relaxed)),
    };
    if app.inner.sessions.read().unwrap().contains_key(&id) {
        return Err(ApiError::conflict("match_exists", format!("match `{id}` already exists")));
    }

    let data = load_match(&req.match_dir).map_err(|e| ApiError::invalid(e.to_string()))?;
    let data = Arc::new(data);
    let log_path = app.inner.config.log_dir.as_ref().map(|d| d.join(format!("{id}.ndjson")));

    let (session, tokens) = match req.resume_log {
        None => (
            Session::new(id.clone(), data.clone(), req.mode, tick_seconds, req.engine_seed, log_path),
            None,
        ),
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| ApiError::invalid(format!("{}: {e}", path.display())))?;
            let recorded = MatchLog::from_ndjson(&text).map_err(|e| ApiError::invalid(e.to_string()))?;
            let (session, tokens) = Session::resume(id.clone(), data.clone(), req.mode, tick_seconds, &recorded, log_path)
                .map_err(|e| ApiError::invalid(e.to_string()))?;
            (session, Some(tokens))
        }
    };
    let status = session.status();
    let shared = Arc::new(Mutex::new(session));
    {
        let mut sessions = app.inner.sessions.write().unwrap();
        if sessions.contains_key(&id) {
            return Err(ApiError::conflict("match_exists", format!("match `{id}` already exists")));
        }
        sessions.insert(id.clone(), shared.clone());
    }
    if status == Status::Running && req.mode == Mode::Live {
        tokio::spawn(session::run_scheduler(shared));
    }
    Ok(Json(Created {
        match_id: id,
        match_hash: data.content_hash(),
        status,
        tokens,
    }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JoinRequest {
    team: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Joined {
    pub team: String,
    pub token: String,
}

async fn join(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<Joined>, ApiError> {
    let session = app.session(&id)?;
    let req: JoinRequest = parse(&body)?;
    let token = session.lock().await.join(&req.team)?;
    Ok(Json(Joined {
        team: req.team,
        token,
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Started {
    pub status: Status,
    pub tick: u32,
}

async fn start(
    State(app): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> Result<Json<Started>, ApiError> {
    app.check_admin(&headers)?;
    let shared = app.session(&id)?;
    let mut session = shared.lock().await;
    session.start()?;
    if session.mode == Mode::Live {
        tokio::spawn(session::run_scheduler(shared.clone()));
    }
    Ok(Json(Started {
        status: session.status(),
        tick: 0,
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Stepped {
    pub tick: u32,
    pub finished: bool,
    pub resolved: Vec<u32>,
}

async fn step(
    State(app): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> Result<Json<Stepped>, ApiError> {
    app.check_admin(&headers)?;
    let shared = app.session(&id)?;
    let mut session = shared.lock().await;
    if session.mode != Mode::Manual {
        return Err(ApiError::conflict("live_mode", "match ticks on its own clock"));
    }
    let events = session.step()?;
    Ok(Json(Stepped {
        tick: events.tick,
        finished: events.final_scores.is_some(),
        resolved: events.resolutions.iter().map(|r| r.robot_id).collect(),
    }))
}

/// Session summary; `snapshot` is absent while in the lobby.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PublicView {
    pub match_id: String,
    pub status: Status,
    pub mode: Mode,
    pub tick_seconds: f64,
    pub teams: Vec<String>,
    pub snapshot: Option<PublicSnapshot>,
}

async fn public(
    State(app): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> Result<Json<PublicView>, ApiError> {
    let shared = app.session(&id)?;
    let session = shared.lock().await;
    let team = match bearer(&headers) {
        Some(_) => Some(team_of(&session, &headers)?),
        None => None,
    };
    let snapshot = match session.game() {
        Some(game) => Some(game.public_snapshot(team.as_deref())?),
        None => None,
    };
    Ok(Json(PublicView {
        match_id: session.id.clone(),
        status: session.status(),
        mode: session.mode,
        tick_seconds: session.tick_seconds,
        teams: session.teams().to_vec(),
        snapshot,
    }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BidRequest {
    robot_id: u32,
    guess: i64,
}

async fn bid(
    State(app): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Json<Ack>, ApiError> {
    let shared = app.session(&id)?;
    let mut session = shared.lock().await;
    let team = team_of(&session, &headers)?;
    let req: BidRequest = parse(&body)?;
    let ack = session.running()?.submit_bid(&team, req.robot_id, req.guess)?;
    Ok(Json(ack))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InterestsRequest {
    #[serde(default)]
    robot_ids: Vec<u32>,
    #[serde(default)]
    part_names: Vec<String>,
}

async fn interests(
    State(app): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Json<Ack>, ApiError> {
    let shared = app.session(&id)?;
    let mut session = shared.lock().await;
    let team = team_of(&session, &headers)?;
    let req: InterestsRequest = parse(&body)?;
    let ack = session
        .running()?
        .submit_interests(&team, req.robot_ids, req.part_names)?;
    Ok(Json(ack))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Drops {
    pub tick: u32,
    pub drops: Vec<Drop>,
}

async fn drops(
    State(app): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    Query(query): Query<HashMap<String, String>>,
) -> Result<Json<Drops>, ApiError> {
    let shared = app.session(&id)?;
    let session = shared.lock().await;
    let team = team_of(&session, &headers)?;
    let since: u32 = match query.get("since") {
        Some(raw) => raw
            .parse()
            .map_err(|_| ApiError::invalid(format!("`since` must be a tick number, got `{raw}`")))?,
        None => 0,
    };
    let Some(game) = session.game() else {
        return Ok(Json(Drops {
            tick: 0,
            drops: Vec::new(),
        }));
    };
    let drops = game
        .drops(&team)?
        .iter()
        .filter(|d| d.tick > since)
        .cloned()
        .collect();
    Ok(Json(Drops {
        tick: game.tick(),
        drops,
    }))
}

async fn log(
    State(app): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    app.check_admin(&headers)?;
    let shared = app.session(&id)?;
    let session = shared.lock().await;
    match (session.status(), session.game()) {
        (Status::Finished, Some(game)) => Ok((
            StatusCode::OK,
            [(header::CONTENT_TYPE, "application/x-ndjson")],
            game.log().to_ndjson(),
        )
            .into_response()),
        _ => Err(ApiError::conflict("not_finished", "log is available once the match finishes")),
    }
}
