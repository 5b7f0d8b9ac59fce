use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid configuration field `{field}`: {reason}")]
pub struct ConfigError {
    pub field: &'static str,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: &'static str, reason: impl Into<String>) -> Self {
        Self {
            field,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("family tree needs at least 2 robots, got {0}")]
    TooFewRobots(usize),
    #[error("network growth needs n > m >= 1 (n = {n}, m = {m})")]
    NetworkTooSmall { n: usize, m: usize },
    #[error("could not draw a productivity model with a negative robot after {0} attempts")]
    ProductivityRetries(usize),
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {file}: {source}")]
    Parse {
        file: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("integrity check failed: manifest hash {expected}, content hash {actual}")]
    Integrity { expected: String, actual: String },
    #[error("{file} is inconsistent with the manifest: {reason}")]
    Inconsistent { file: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("team names must be distinct (got `{0}` twice)")]
    DuplicateTeam(String),
    #[error("unknown team `{0}`")]
    UnknownTeam(String),
    #[error("unknown robot {0}")]
    UnknownRobot(u32),
    #[error("unknown part `{0}`")]
    UnknownPart(String),
    #[error("guess {0} is outside 0..=100 (use -1 to decline)")]
    InvalidGuess(i64),
    #[error("robot {robot_id} no longer accepts bids (expired at tick {expiration_tick})")]
    LateBid { robot_id: u32, expiration_tick: u32 },
    #[error("robot {0} is not pending")]
    NotPending(u32),
    #[error("robot {robot_id} expires at tick {expiration_tick}, not at tick {tick}")]
    NotExpiring {
        robot_id: u32,
        expiration_tick: u32,
        tick: u32,
    },
    #[error("match is already finished")]
    Finished,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("log is empty or does not begin with a match start event")]
    MissingStart,
    #[error("log has no trailing hash line")]
    MissingHash,
    #[error("recorded log hash {recorded} does not match the event stream hash {computed}")]
    HashMismatch { recorded: String, computed: String },
    #[error("log refers to match {expected}, but the supplied match hashes to {actual}")]
    WrongMatch { expected: String, actual: String },
    #[error("re-simulation diverged at event {index}: {reason}")]
    Diverged { index: usize, reason: String },
    #[error("recorded command was rejected during re-simulation: {0}")]
    Rejected(#[from] EngineError),
}
