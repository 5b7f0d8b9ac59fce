//! In-process matches between two bots, without a server or wall clock.

use std::sync::Arc;

use crate::engine::GameState;
use crate::error::EngineError;
use crate::matchgen::MatchData;
use crate::simbot::{Bot, Command};

/// Applies one bot command, reporting whether the engine accepted it.
pub fn apply_command(state: &mut GameState, team: &str, command: Command) -> Result<(), EngineError> {
    match command {
        Command::Bid { robot_id, guess } => state.submit_bid(team, robot_id, guess).map(|_| ()),
        Command::Interests {
            robot_ids,
            part_names,
        } => state.submit_interests(team, robot_ids, part_names).map(|_| ()),
    }
}

/// Plays a whole match. Before every tick each bot (in team name order)
/// observes its snapshot and its commands are applied; rejected commands
/// are dropped and counted on the bot.
pub fn run_headless(
    data: Arc<MatchData>,
    mut players: [(&str, &mut Bot); 2],
    engine_seed: u64,
) -> Result<GameState, EngineError> {
    let mut state = GameState::new(data, players[0].0, players[1].0, engine_seed)?;
    // Visit bots in the engine's team order.
    players.sort_by(|a, b| a.0.cmp(b.0));
    while !state.is_finished() {
        for (team, bot) in players.iter_mut() {
            let obs = state.public_snapshot(Some(team))?;
            for command in bot.act(&obs) {
                if apply_command(&mut state, team, command).is_err() {
                    bot.record_rejection();
                }
            }
        }
        state.step()?;
    }
    Ok(state)
}
