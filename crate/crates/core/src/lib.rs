//! Core of the Roboviz data game: deterministic match generation, the
//! tick-based engine, replayable match logs and simulated players.

pub mod canonical;
pub mod config;
pub mod engine;
pub mod error;
pub mod matchgen;
pub mod rng;

pub use engine::{init_game, GameState, Guess, Reason, ResolutionOutcome, RobotStatus};
pub use config::{ExpirationBias, MatchConfig};
pub use error::{ConfigError, EngineError, GenError, LogError, StoreError};
pub use matchgen::{generate_match, MatchData, RobotRecord};
pub mod replay;
pub mod simbot;
