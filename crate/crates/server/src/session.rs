//! One hosted match: lobby, running engine, and its tick loop.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use roboviz_core::engine::MatchLog;
use roboviz_core::{replay, GameState, LogError, MatchData};
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;
use tokio::time::{sleep_until, Instant};

use crate::error::ApiError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Ticks every `tick_seconds` of wall time.
    #[default]
    Live,
    /// Ticks only when the admin calls `step`.
    Manual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Lobby,
    Running,
    Finished,
}

pub type SharedSession = Arc<Mutex<Session>>;

pub struct Session {
    pub id: String,
    pub mode: Mode,
    pub tick_seconds: f64,
    pub engine_seed: u64,
    data: Arc<MatchData>,
    /// token -> team
    tokens: HashMap<String, String>,
    lobby: Vec<String>,
    game: Option<GameState>,
    log_path: Option<PathBuf>,
}

pub fn new_token() -> String {
    hex::encode(rand::random::<[u8; 32]>())
}

impl Session {
    pub fn new(
        id: String,
        data: Arc<MatchData>,
        mode: Mode,
        tick_seconds: f64,
        engine_seed: u64,
        log_path: Option<PathBuf>,
    ) -> Self {
        Self {
            id,
            mode,
            tick_seconds,
            engine_seed,
            data,
            tokens: HashMap::new(),
            lobby: Vec::new(),
            game: None,
            log_path,
        }
    }

    /// Rebuilds a session from a persisted log. Both teams get fresh tokens,
    /// returned as `team -> token`.
    pub fn resume(
        id: String,
        data: Arc<MatchData>,
        mode: Mode,
        tick_seconds: f64,
        recorded: &MatchLog,
        log_path: Option<PathBuf>,
    ) -> Result<(Self, HashMap<String, String>), LogError> {
        let game = replay::rebuild(data.clone(), recorded)?;
        let mut session = Self::new(id, data, mode, tick_seconds, game.engine_seed(), log_path);
        let mut issued = HashMap::new();
        for team in game.teams() {
            let token = new_token();
            session.tokens.insert(token.clone(), team.clone());
            issued.insert(team.clone(), token);
        }
        session.lobby = game.teams().to_vec();
        session.game = Some(game);
        session.persist();
        Ok((session, issued))
    }

    pub fn status(&self) -> Status {
        match &self.game {
            None => Status::Lobby,
            Some(g) if g.is_finished() => Status::Finished,
            Some(_) => Status::Running,
        }
    }

    pub fn data(&self) -> &Arc<MatchData> {
        &self.data
    }

    pub fn teams(&self) -> &[String] {
        &self.lobby
    }

    pub fn game(&self) -> Option<&GameState> {
        self.game.as_ref()
    }

    pub fn team_for(&self, token: &str) -> Option<&str> {
        self.tokens.get(token).map(String::as_str)
    }

    pub fn join(&mut self, team: &str) -> Result<String, ApiError> {
        if team.trim().is_empty() || team.len() > 64 {
            return Err(ApiError::invalid("team name must be 1 to 64 characters"));
        }
        if self.status() != Status::Lobby {
            return Err(ApiError::conflict("not_in_lobby", "match has already started"));
        }
        if self.lobby.iter().any(|t| t == team) {
            return Err(ApiError::conflict("team_taken", format!("team `{team}` already joined")));
        }
        if self.lobby.len() == 2 {
            return Err(ApiError::conflict("match_full", "two teams have already joined"));
        }
        let token = new_token();
        self.tokens.insert(token.clone(), team.to_string());
        self.lobby.push(team.to_string());
        Ok(token)
    }

    pub fn start(&mut self) -> Result<(), ApiError> {
        if self.status() != Status::Lobby {
            return Err(ApiError::conflict("already_started", "match has already started"));
        }
        if self.lobby.len() != 2 {
            return Err(ApiError::conflict(
                "not_enough_teams",
                format!("{} of 2 teams have joined", self.lobby.len()),
            ));
        }
        let game = GameState::new(self.data.clone(), &self.lobby[0], &self.lobby[1], self.engine_seed)?;
        self.game = Some(game);
        self.persist();
        Ok(())
    }

    /// The running engine, for commands.
    pub fn running(&mut self) -> Result<&mut GameState, ApiError> {
        match self.status() {
            Status::Lobby => Err(ApiError::conflict("not_started", "match has not started")),
            Status::Finished => Err(ApiError::conflict("finished", "match is already finished")),
            Status::Running => Ok(self.game.as_mut().expect("running match has a game")),
        }
    }

    /// Advances one tick and persists the log.
    pub fn step(&mut self) -> Result<roboviz_core::engine::TickEvents, ApiError> {
        let events = self.running()?.step();
        let events = match events {
            Ok(events) => events,
            Err(err) => {
                if let Some(game) = self.game.as_mut() {
                    let _ = game.abort(&format!("tick failed: {err}"));
                }
                self.persist();
                return Err(err.into());
            }
        };
        self.persist();
        Ok(events)
    }

    /// Writes the log to its file, if the session has one. The file is
    /// replaced atomically so a crash never leaves a torn log.
    pub fn persist(&self) {
        let (Some(path), Some(game)) = (&self.log_path, &self.game) else {
            return;
        };
        if let Err(err) = write_atomic(path, game.log().to_ndjson().as_bytes()) {
            tracing::warn!("could not persist log for match {}: {err}", self.id);
        }
    }

    pub fn log_path(&self) -> Option<&Path> {
        self.log_path.as_deref()
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("ndjson.tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)
}

/// Deadline of tick `k` counted from `start`. Every deadline is computed from
/// the start, so late wake-ups do not push later ticks back.
pub fn deadline(start: Instant, tick_seconds: f64, k: u32) -> Instant {
    start + Duration::from_secs_f64(tick_seconds * k as f64)
}

/// Drives a live session until it finishes.
pub async fn run_scheduler(session: SharedSession) {
    let tick_seconds = session.lock().await.tick_seconds;
    let start = Instant::now();
    let mut k = 1;
    loop {
        sleep_until(deadline(start, tick_seconds, k)).await;
        let mut s = session.lock().await;
        if s.status() != Status::Running {
            break;
        }
        if s.step().is_err() {
            break;
        }
        if s.status() == Status::Finished {
            break;
        }
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deadlines_do_not_drift() {
        let start = Instant::now();
        let d100 = deadline(start, 6.0, 100) - start;
        assert_eq!(d100, Duration::from_secs(600));
        let fine = deadline(start, 0.01, 100) - start;
        assert!((fine.as_secs_f64() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tokens_carry_256_bits() {
        let a = new_token();
        assert_eq!(a.len(), 64);
        assert!(a.chars().all(|c| c.is_ascii_hexdigit()));
        assert_ne!(a, new_token());
    }
}
