//! Append-only match log.
//!
//! On disk the log is newline-delimited JSON: one canonical (sorted-key,
//! compact) event per line, followed by a final `{"log_hash": ...}` line.
//! The hash is SHA-256 over every event line including its newline.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::canonical::to_canonical_json;
use crate::config::MatchConfig;
use crate::engine::hacker::Drop;
use crate::engine::ResolutionOutcome;
use crate::engine::resolution::Guess;
use crate::error::LogError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    MatchStarted {
        match_hash: String,
        config: MatchConfig,
        teams: [String; 2],
        engine_seed: u64,
    },
    TickAdvanced,
    BidSubmitted {
        team: String,
        robot_id: u32,
        guess: Guess,
    },
    InterestsUpdated {
        team: String,
        robot_ids: Vec<u32>,
        part_names: Vec<String>,
    },
    DropDelivered {
        drop: Drop,
    },
    RobotResolved {
        outcome: ResolutionOutcome,
    },
    MatchEnded {
        scores: BTreeMap<String, f64>,
    },
    MatchAborted {
        reason: String,
    },
}

impl Event {
    /// Commands are the inputs a replay feeds back into the engine; every
    /// other event is derived from them.
    pub fn is_command(&self) -> bool {
        matches!(
            self,
            Event::TickAdvanced
                | Event::BidSubmitted { .. }
                | Event::InterestsUpdated { .. }
                | Event::MatchAborted { .. }
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Event::MatchStarted { .. } => "match_started",
            Event::TickAdvanced => "tick_advanced",
            Event::BidSubmitted { .. } => "bid_submitted",
            Event::InterestsUpdated { .. } => "interests_updated",
            Event::DropDelivered { .. } => "drop_delivered",
            Event::RobotResolved { .. } => "robot_resolved",
            Event::MatchEnded { .. } => "match_ended",
            Event::MatchAborted { .. } => "match_aborted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub seq: u64,
    pub tick: u32,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Debug, Serialize, Deserialize)]
struct HashLine {
    log_hash: String,
}

/// Entries plus their canonical lines and a running hash, so hashing and
/// writing a long log stay cheap.
#[derive(Clone, Default)]
pub struct MatchLog {
    entries: Vec<LogEntry>,
    lines: Vec<String>,
    hasher: Sha256,
}

impl PartialEq for MatchLog {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl fmt::Debug for MatchLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatchLog").field("entries", &self.entries).finish()
    }
}

impl MatchLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, tick: u32, event: Event) -> &LogEntry {
        let seq = self.entries.len() as u64;
        let entry = LogEntry { seq, tick, event };
        let line = to_canonical_json(&entry);
        self.hasher.update(line.as_bytes());
        self.hasher.update(b"\n");
        self.lines.push(line);
        self.entries.push(entry);
        self.entries.last().expect("just pushed")
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// SHA-256 over every canonical event line, each followed by `\n`.
    pub fn hash(&self) -> String {
        hex::encode(self.hasher.clone().finalize())
    }

    pub fn to_ndjson(&self) -> String {
        let mut out = String::with_capacity(self.lines.iter().map(|l| l.len() + 1).sum::<usize>() + 90);
        for line in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&to_canonical_json(&HashLine {
            log_hash: self.hash(),
        }));
        out.push('\n');
        out
    }

    /// Parses a log file and checks its trailing hash line.
    pub fn from_ndjson(text: &str) -> Result<Self, LogError> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .collect();
        let Some((&(last_no, last), events)) = lines.split_last() else {
            return Err(LogError::MissingStart);
        };
        let recorded: HashLine = serde_json::from_str(last).map_err(|_| {
            // Distinguish a missing hash line from a corrupt one.
            if serde_json::from_str::<LogEntry>(last).is_ok() {
                LogError::MissingHash
            } else {
                LogError::Parse {
                    line: last_no + 1,
                    source: serde_json::from_str::<HashLine>(last).unwrap_err(),
                }
            }
        })?;
        let mut log = Self::new();
        for &(no, line) in events {
            let entry: LogEntry = serde_json::from_str(line).map_err(|source| LogError::Parse {
                line: no + 1,
                source,
            })?;
            if entry.seq != log.len() as u64 {
                return Err(LogError::Diverged {
                    index: log.len(),
                    reason: format!("line {} carries sequence number {}", no + 1, entry.seq),
                });
            }
            log.push(entry.tick, entry.event);
        }
        let computed = log.hash();
        if computed != recorded.log_hash {
            return Err(LogError::HashMismatch {
                recorded: recorded.log_hash,
                computed,
            });
        }
        if !matches!(
            log.entries.first().map(|e| &e.event),
            Some(Event::MatchStarted { .. })
        ) {
            return Err(LogError::MissingStart);
        }
        Ok(log)
    }

    pub fn start(&self) -> Option<(&str, &MatchConfig, &[String; 2], u64)> {
        match self.entries.first().map(|e| &e.event) {
            Some(Event::MatchStarted {
                match_hash,
                config,
                teams,
                engine_seed,
            }) => Some((match_hash, config, teams, *engine_seed)),
            _ => None,
        }
    }

    pub fn final_scores(&self) -> Option<&BTreeMap<String, f64>> {
        self.entries.iter().rev().find_map(|e| match &e.event {
            Event::MatchEnded { scores } => Some(scores),
            _ => None,
        })
    }

    pub fn is_aborted(&self) -> bool {
        self.entries
            .iter()
            .any(|e| matches!(e.event, Event::MatchAborted { .. }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MatchLog {
        let mut log = MatchLog::new();
        log.push(
            0,
            Event::MatchStarted {
                match_hash: "abc".into(),
                config: MatchConfig::default(),
                teams: ["a".into(), "b".into()],
                engine_seed: 1,
            },
        );
        log.push(
            0,
            Event::BidSubmitted {
                team: "a".into(),
                robot_id: 3,
                guess: Guess::Decline,
            },
        );
        log.push(1, Event::TickAdvanced);
        log
    }

    #[test]
    fn ndjson_round_trip_keeps_hash() {
        let log = sample();
        let text = log.to_ndjson();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().last().unwrap().starts_with(r#"{"log_hash":""#));
        let back = MatchLog::from_ndjson(&text).unwrap();
        assert_eq!(back, log);
        assert_eq!(back.hash(), log.hash());
    }

    #[test]
    fn lines_are_canonical() {
        let text = sample().to_ndjson();
        let bid = text.lines().nth(1).unwrap();
        assert_eq!(
            bid,
            r#"{"event":"bid_submitted","guess":-1,"robot_id":3,"seq":1,"team":"a","tick":0}"#
        );
    }

    #[test]
    fn tampering_is_detected() {
        let text = sample().to_ndjson().replace(r#""robot_id":3"#, r#""robot_id":4"#);
        assert!(matches!(
            MatchLog::from_ndjson(&text),
            Err(LogError::HashMismatch { .. })
        ));
        let truncated: String = sample()
            .to_ndjson()
            .lines()
            .take(3)
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(
            MatchLog::from_ndjson(&truncated),
            Err(LogError::MissingHash)
        ));
        assert!(matches!(MatchLog::from_ndjson(""), Err(LogError::MissingStart)));
    }
}
