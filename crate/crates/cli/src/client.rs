//! A bot playing over the HTTP API, exactly as a team's own client would.

use std::thread::sleep;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use roboviz_core::simbot::{Bot, Command};
use roboviz_server::{Joined, PublicView, Status};
use serde_json::{json, Value};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct BotReport {
    pub team: String,
    pub score: f64,
    pub claimed: usize,
    pub sent: usize,
    pub rejected: usize,
}

pub struct Remote {
    client: Client,
    base: String,
    match_id: String,
}

impl Remote {
    pub fn new(url: &str, match_id: &str) -> Self {
        Self {
            client: Client::new(),
            base: url.trim_end_matches('/').to_string(),
            match_id: match_id.to_string(),
        }
    }

    fn url(&self, route: &str) -> String {
        format!("{}/matches/{}/{route}", self.base, self.match_id)
    }

    pub fn join(&self, team: &str) -> Result<String, CliError> {
        let resp = self
            .client
            .post(self.url("join"))
            .json(&json!({ "team": team }))
            .send()
            .map_err(runtime)?;
        if !resp.status().is_success() {
            return Err(CliError::Runtime(format!("join failed: {}", describe(resp))));
        }
        Ok(resp.json::<Joined>().map_err(runtime)?.token)
    }

    pub fn public(&self, token: &str) -> Result<PublicView, CliError> {
        let resp = self
            .client
            .get(self.url("public"))
            .bearer_auth(token)
            .send()
            .map_err(runtime)?;
        if !resp.status().is_success() {
            return Err(CliError::Runtime(format!("snapshot failed: {}", describe(resp))));
        }
        resp.json().map_err(runtime)
    }

    /// Posts one command; `Ok(false)` means the server refused it.
    pub fn send(&self, token: &str, command: &Command) -> Result<bool, CliError> {
        let (route, body) = match command {
            Command::Bid { robot_id, guess } => ("bid", json!({ "robot_id": robot_id, "guess": guess })),
            Command::Interests {
                robot_ids,
                part_names,
            } => (
                "interests",
                json!({ "robot_ids": robot_ids, "part_names": part_names }),
            ),
        };
        let resp = self
            .client
            .post(self.url(route))
            .bearer_auth(token)
            .json(&body)
            .send()
            .map_err(runtime)?;
        match resp.status() {
            s if s.is_success() => Ok(true),
            StatusCode::CONFLICT | StatusCode::UNPROCESSABLE_ENTITY | StatusCode::NOT_FOUND => Ok(false),
            _ => Err(CliError::Runtime(format!("{route} failed: {}", describe(resp)))),
        }
    }
}

fn runtime(err: reqwest::Error) -> CliError {
    CliError::Runtime(err.to_string())
}

fn describe(resp: reqwest::blocking::Response) -> String {
    let status = resp.status();
    let body: Value = resp.json().unwrap_or(Value::Null);
    match body.get("message").and_then(Value::as_str) {
        Some(m) => format!("{status}: {m}"),
        None => status.to_string(),
    }
}

/// Joins (unless a token is given) and plays until the match finishes,
/// acting once per observed tick.
pub fn play(remote: &Remote, team: &str, token: Option<String>, bot: &mut Bot) -> Result<BotReport, CliError> {
    let token = match token {
        Some(t) => t,
        None => remote.join(team)?,
    };
    let mut acted_at = None;
    let mut sent = 0;
    loop {
        let view = remote.public(&token)?;
        let pause = Duration::from_secs_f64((view.tick_seconds / 4.0).clamp(0.005, 1.0));
        match (view.status, view.snapshot) {
            (Status::Finished, Some(snap)) => {
                let claimed = snap
                    .robots
                    .iter()
                    .filter(|r| r.status.claimed_by() == Some(team))
                    .count();
                return Ok(BotReport {
                    team: team.to_string(),
                    score: snap.scores.get(team).copied().unwrap_or(0.0),
                    claimed,
                    sent,
                    rejected: bot.rejected(),
                });
            }
            (Status::Running, Some(snap)) if acted_at != Some(snap.tick) => {
                for command in bot.act(&snap) {
                    sent += 1;
                    if !remote.send(&token, &command)? {
                        bot.record_rejection();
                    }
                }
                acted_at = Some(snap.tick);
            }
            _ => {}
        }
        sleep(pause);
    }
}
