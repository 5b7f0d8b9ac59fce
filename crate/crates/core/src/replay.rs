//! Re-simulating a recorded match from its command events.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::engine::{Event, GameState, MatchLog, RobotStatus};
use crate::error::{GenError, LogError};
use crate::matchgen::{generate_match, MatchData};

#[derive(Debug, Clone, PartialEq)]
pub struct ReplaySummary {
    pub log_hash: String,
    pub tick: u32,
    pub finished: bool,
    pub aborted: bool,
    pub scores: BTreeMap<String, f64>,
    pub statuses: Vec<RobotStatus>,
}

/// Rebuilds the engine state by feeding the log's commands back into a fresh
/// engine. Derived events (drops, resolutions, match end) are regenerated and
/// must match the recording entry for entry.
pub fn rebuild(data: Arc<MatchData>, recorded: &MatchLog) -> Result<GameState, LogError> {
    let (match_hash, _, teams, engine_seed) = recorded.start().ok_or(LogError::MissingStart)?;
    let actual = data.content_hash();
    if match_hash != actual {
        return Err(LogError::WrongMatch {
            expected: match_hash.to_string(),
            actual,
        });
    }
    let mut state = GameState::new(data, &teams[0], &teams[1], engine_seed)?;

    for entry in &recorded.entries()[1..] {
        match &entry.event {
            Event::TickAdvanced => {
                state.step()?;
            }
            Event::BidSubmitted {
                team,
                robot_id,
                guess,
            } => {
                state.submit_bid(team, *robot_id, guess.to_wire())?;
            }
            Event::InterestsUpdated {
                team,
                robot_ids,
                part_names,
            } => {
                state.submit_interests(team, robot_ids.clone(), part_names.clone())?;
            }
            Event::MatchAborted { reason } => state.abort(reason)?,
            Event::MatchStarted { .. } => {
                return Err(LogError::Diverged {
                    index: entry.seq as usize,
                    reason: "second match start event".into(),
                })
            }
            Event::DropDelivered { .. } | Event::RobotResolved { .. } | Event::MatchEnded { .. } => {}
        }
        if state.log().len() < entry.seq as usize + 1 {
            return Err(LogError::Diverged {
                index: entry.seq as usize,
                reason: format!("re-simulation has no `{}` event here", entry.event.kind()),
            });
        }
    }

    let replayed = state.log().entries();
    if let Some(index) = (0..replayed.len().max(recorded.len()))
        .find(|&i| replayed.get(i) != recorded.entries().get(i))
    {
        let describe = |e: Option<&crate::engine::LogEntry>| {
            e.map_or("nothing".to_string(), |e| format!("`{}` at tick {}", e.event.kind(), e.tick))
        };
        return Err(LogError::Diverged {
            index,
            reason: format!(
                "recorded {}, re-simulated {}",
                describe(recorded.entries().get(index)),
                describe(replayed.get(index))
            ),
        });
    }
    Ok(state)
}

/// Re-simulates `recorded` and summarizes the reproduced result.
pub fn verify(data: Arc<MatchData>, recorded: &MatchLog) -> Result<ReplaySummary, LogError> {
    let state = rebuild(data, recorded)?;
    Ok(ReplaySummary {
        log_hash: state.log().hash(),
        tick: state.tick(),
        finished: state.is_finished(),
        aborted: state.log().is_aborted(),
        scores: state.scores(),
        statuses: state.statuses().to_vec(),
    })
}

/// Regenerates the match a log was played on from the config it echoes.
pub fn regenerate_match(recorded: &MatchLog) -> Result<MatchData, GenError> {
    let (_, config, _, _) = recorded
        .start()
        .ok_or_else(|| crate::ConfigError::new("log", "log has no match start event"))?;
    generate_match(config)
}
