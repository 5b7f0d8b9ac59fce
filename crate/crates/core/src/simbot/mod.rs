//! Simulated players.
//!
//! Only [`BotPolicy::Omniscient`] bots are handed the match files; every
//! other policy is built through [`Bot::observer`] and sees nothing beyond
//! the team snapshot, which carries the team's own drops.

pub mod fit;
pub mod headless;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{PartItem, PublicRobot, PublicSnapshot};
use crate::matchgen::parts::{part_index, PartKind, PartValue, NUM_CATEGORICAL, NUM_QUANTITATIVE, PARTS};
use crate::matchgen::MatchData;

pub use fit::{polyfit, PolyFit};
pub use headless::run_headless;

/// Robots expiring within this many ticks get bids.
pub const BID_HORIZON: u32 = 5;
const DEFAULT_DEGREE: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BotError {
    #[error("error range must be non-negative, got {0}")]
    NegativeError(i64),
    #[error("policy `{0}` has no error range")]
    NoErrorRange(String),
    #[error("unknown bot policy `{0}` (expected omniscient[:E], regression[:D], filter[:D] or greedy[:D])")]
    UnknownPolicy(String),
    #[error("omniscient bots need the match files")]
    MissingTruth,
    #[error("omniscient bots cannot be built as observers")]
    NotAnObserver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BotPolicy {
    /// Reads the truth and bids it plus uniform integer noise in `[-error, error]`.
    Omniscient { error: u32 },
    /// Fits a polynomial to delivered series points (plus siblings' points
    /// when its own are scarce) and bids the extrapolated value.
    SeriesRegression { degree: usize },
    /// Like `SeriesRegression`, but declines robots whose estimated
    /// productivity is negative.
    ProductivityFilter { degree: usize },
    /// Like `SeriesRegression`, with hacker interest on high-degree robots.
    NetworkGreedy { degree: usize },
}

impl BotPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            BotPolicy::Omniscient { .. } => "omniscient",
            BotPolicy::SeriesRegression { .. } => "regression",
            BotPolicy::ProductivityFilter { .. } => "filter",
            BotPolicy::NetworkGreedy { .. } => "greedy",
        }
    }
}

impl fmt::Display for BotPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BotPolicy::Omniscient { error } => write!(f, "omniscient:{error}"),
            BotPolicy::SeriesRegression { degree }
            | BotPolicy::ProductivityFilter { degree }
            | BotPolicy::NetworkGreedy { degree } => write!(f, "{}:{degree}", self.name()),
        }
    }
}

impl FromStr for BotPolicy {
    type Err = BotError;

    /// Parses `omniscient:20`, `regression`, `filter:3`, `greedy` and so on.
    fn from_str(spec: &str) -> Result<Self, BotError> {
        let unknown = || BotError::UnknownPolicy(spec.to_string());
        let (kind, arg) = match spec.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (spec.trim(), None),
        };
        let number = |default: i64| -> Result<i64, BotError> {
            arg.map_or(Ok(default), |a| a.parse::<i64>().map_err(|_| unknown()))
        };
        let degree = || -> Result<usize, BotError> {
            usize::try_from(number(DEFAULT_DEGREE as i64)?).map_err(|_| unknown())
        };
        match kind {
            "omniscient" => {
                extend_error(BotPolicy::Omniscient { error: 0 }, number(10)?)
            }
            "regression" => Ok(BotPolicy::SeriesRegression { degree: degree()? }),
            "filter" => Ok(BotPolicy::ProductivityFilter { degree: degree()? }),
            "greedy" => Ok(BotPolicy::NetworkGreedy { degree: degree()? }),
            _ => Err(unknown()),
        }
    }
}

/// Returns `policy` with its noise range replaced by `new_error`.
pub fn extend_error(policy: BotPolicy, new_error: i64) -> Result<BotPolicy, BotError> {
    match policy {
        BotPolicy::Omniscient { .. } => {
            let error = u32::try_from(new_error).map_err(|_| BotError::NegativeError(new_error))?;
            Ok(BotPolicy::Omniscient { error })
        }
        other => Err(BotError::NoErrorRange(other.name().to_string())),
    }
}

/// A command a bot wants to send; `guess` uses the wire encoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    Bid { robot_id: u32, guess: i64 },
    Interests { robot_ids: Vec<u32>, part_names: Vec<String> },
}

#[derive(Debug, Clone)]
pub struct Bot {
    policy: BotPolicy,
    rng: ChaCha8Rng,
    truth: Option<Arc<MatchData>>,
    productivity_hints: BTreeMap<u32, f64>,
    last_interests: Option<(Vec<u32>, Vec<String>)>,
    rejected: usize,
}

impl Bot {
    pub fn omniscient(data: Arc<MatchData>, error: u32, seed: u64) -> Self {
        Self {
            policy: BotPolicy::Omniscient { error },
            rng: ChaCha8Rng::seed_from_u64(seed),
            truth: Some(data),
            productivity_hints: BTreeMap::new(),
            last_interests: None,
            rejected: 0,
        }
    }

    pub fn observer(policy: BotPolicy, seed: u64) -> Result<Self, BotError> {
        if matches!(policy, BotPolicy::Omniscient { .. }) {
            return Err(BotError::NotAnObserver);
        }
        Ok(Self {
            policy,
            rng: ChaCha8Rng::seed_from_u64(seed),
            truth: None,
            productivity_hints: BTreeMap::new(),
            last_interests: None,
            rejected: 0,
        })
    }

    /// Builds either kind; omniscient policies require `truth`.
    pub fn from_policy(
        policy: BotPolicy,
        truth: Option<Arc<MatchData>>,
        seed: u64,
    ) -> Result<Self, BotError> {
        match policy {
            BotPolicy::Omniscient { error } => {
                Ok(Self::omniscient(truth.ok_or(BotError::MissingTruth)?, error, seed))
            }
            other => Self::observer(other, seed),
        }
    }

    /// Replaces the filter bot's productivity estimates for the given robots,
    /// e.g. with the output of a perfectly learned model.
    pub fn with_productivity_hints(mut self, hints: BTreeMap<u32, f64>) -> Self {
        self.productivity_hints = hints;
        self
    }

    pub fn policy(&self) -> BotPolicy {
        self.policy
    }

    pub fn set_error(&mut self, error: i64) -> Result<(), BotError> {
        self.policy = extend_error(self.policy, error)?;
        Ok(())
    }

    /// Commands the engine refused (counted by whoever applies them).
    pub fn rejected(&self) -> usize {
        self.rejected
    }

    pub fn record_rejection(&mut self) {
        self.rejected += 1;
    }

    /// Decides this tick's commands from the team's snapshot.
    pub fn act(&mut self, obs: &PublicSnapshot) -> Vec<Command> {
        if obs.finished {
            return Vec::new();
        }
        match self.policy {
            BotPolicy::Omniscient { error } => self.act_omniscient(obs, error),
            BotPolicy::SeriesRegression { degree } => {
                let mut cmds = self.interest_command(next_expiring(obs, 5), Vec::new());
                cmds.extend(regression_bids(obs, degree, |_| true));
                cmds
            }
            BotPolicy::ProductivityFilter { degree } => {
                let soon = next_expiring(obs, 5);
                let mut cmds = self.interest_command(soon, Vec::new());
                let estimates = ProductivityEstimator::fit(obs);
                let hints = &self.productivity_hints;
                cmds.extend(regression_bids(obs, degree, |robot| {
                    let estimate = hints
                        .get(&robot.id)
                        .copied()
                        .unwrap_or_else(|| estimates.estimate(robot.id));
                    estimate >= 0.0
                }));
                cmds
            }
            BotPolicy::NetworkGreedy { degree } => {
                let hubs = high_degree_upcoming(obs, 15, 5);
                let mut cmds = self.interest_command(hubs, Vec::new());
                cmds.extend(regression_bids(obs, degree, |_| true));
                cmds
            }
        }
    }

    fn act_omniscient(&mut self, obs: &PublicSnapshot, error: u32) -> Vec<Command> {
        let data = self
            .truth
            .as_ref()
            .expect("omniscient bots are always built with the match files");
        let own_bids = obs.own.as_ref().map(|o| &o.bids);
        let mut cmds = Vec::new();
        for robot in obs.expiring_within(BID_HORIZON) {
            if own_bids.is_some_and(|b| b.contains_key(&robot.id)) {
                continue;
            }
            let truth = data.truth(robot.id) as i64;
            let noise = if error == 0 {
                0
            } else {
                self.rng.random_range(-(error as i64)..=error as i64)
            };
            cmds.push(Command::Bid {
                robot_id: robot.id,
                guess: (truth + noise).clamp(0, 100),
            });
        }
        cmds
    }

    fn interest_command(&mut self, robot_ids: Vec<u32>, part_names: Vec<String>) -> Vec<Command> {
        let wanted = (robot_ids, part_names);
        if self.last_interests.as_ref() == Some(&wanted) {
            return Vec::new();
        }
        self.last_interests = Some(wanted.clone());
        vec![Command::Interests {
            robot_ids: wanted.0,
            part_names: wanted.1,
        }]
    }
}

/// Ids of the next `count` pending robots to expire.
fn next_expiring(obs: &PublicSnapshot, count: usize) -> Vec<u32> {
    obs.expiring_within(obs.num_ticks)
        .into_iter()
        .take(count)
        .map(|r| r.id)
        .collect()
}

/// The `count` highest-degree pending robots expiring within `horizon` ticks.
fn high_degree_upcoming(obs: &PublicSnapshot, horizon: u32, count: usize) -> Vec<u32> {
    let mut upcoming = obs.expiring_within(horizon);
    upcoming.sort_by_key(|r| (std::cmp::Reverse(obs.network.degree(r.id)), r.id));
    let mut ids: Vec<u32> = upcoming.into_iter().take(count).map(|r| r.id).collect();
    ids.sort_unstable();
    ids
}

/// Series points the team has received, per robot.
fn observed_points(obs: &PublicSnapshot) -> BTreeMap<u32, Vec<(u32, f64)>> {
    let mut points: BTreeMap<u32, Vec<(u32, f64)>> = BTreeMap::new();
    if let Some(own) = &obs.own {
        for drop in &own.drops {
            for item in &drop.series_items {
                points
                    .entry(item.robot_id)
                    .or_default()
                    .push((item.t, item.value as f64));
            }
        }
    }
    points
}

fn regression_bids(
    obs: &PublicSnapshot,
    degree: usize,
    wants: impl Fn(&PublicRobot) -> bool,
) -> Vec<Command> {
    let points = observed_points(obs);
    let own_bids = obs.own.as_ref().map(|o| &o.bids);
    let mut cmds = Vec::new();
    for robot in obs.expiring_within(BID_HORIZON) {
        let guess = if wants(robot) {
            predict_series(obs, &points, robot.id, degree)
        } else {
            -1
        };
        let current = own_bids.and_then(|b| b.get(&robot.id)).map(|g| g.to_wire());
        if current != Some(guess) {
            cmds.push(Command::Bid {
                robot_id: robot.id,
                guess,
            });
        }
    }
    cmds
}

fn predict_series(
    obs: &PublicSnapshot,
    points: &BTreeMap<u32, Vec<(u32, f64)>>,
    robot: u32,
    degree: usize,
) -> i64 {
    let mut sample: Vec<(u32, f64)> = points.get(&robot).cloned().unwrap_or_default();
    if sample.len() <= degree {
        for sib in obs.tree.siblings(robot) {
            sample.extend(points.get(&sib).into_iter().flatten().copied());
        }
    }
    let expiration = obs.robots[robot as usize].expiration_tick;
    polyfit(&sample, degree, obs.num_ticks)
        .map_or(50, |fit| fit.predict_guess(expiration) as i64)
}

/// Ridge regression of revealed productivity on the observed parts.
struct ProductivityEstimator {
    coefficients: Option<DVector<f64>>,
    features: BTreeMap<u32, DVector<f64>>,
    fallback: f64,
}

const FEATURES: usize = 1 + NUM_QUANTITATIVE + NUM_CATEGORICAL * 3;
const MIN_TRAINING: usize = 8;
const RIDGE: f64 = 1.0;

impl ProductivityEstimator {
    fn fit(obs: &PublicSnapshot) -> Self {
        let mut known: BTreeMap<u32, Vec<&PartItem>> = BTreeMap::new();
        if let Some(own) = &obs.own {
            for drop in &own.drops {
                for item in &drop.part_items {
                    known.entry(item.robot_id).or_default().push(item);
                }
            }
        }
        // Column means of observed quantitative parts, used for imputation.
        let mut sums = [0.0; NUM_QUANTITATIVE];
        let mut counts = [0usize; NUM_QUANTITATIVE];
        for items in known.values() {
            for item in items {
                if let (Some(i), PartValue::Number(v)) = (part_index(&item.part), item.value) {
                    sums[i] += v;
                    counts[i] += 1;
                }
            }
        }
        let means: Vec<f64> = (0..NUM_QUANTITATIVE)
            .map(|i| match PARTS[i].kind {
                _ if counts[i] > 0 => sums[i] / counts[i] as f64,
                PartKind::Quantitative { min, max } => (min + max) / 2.0,
                PartKind::Categorical => 0.0,
            })
            .collect();

        let features: BTreeMap<u32, DVector<f64>> = known
            .iter()
            .map(|(&id, items)| {
                let mut row = DVector::zeros(FEATURES);
                row[0] = 1.0;
                for i in 0..NUM_QUANTITATIVE {
                    row[1 + i] = means[i];
                }
                for item in items {
                    match (part_index(&item.part), item.value) {
                        (Some(i), PartValue::Number(v)) if i < NUM_QUANTITATIVE => row[1 + i] = v,
                        (Some(i), PartValue::Label(label)) if i >= NUM_QUANTITATIVE => {
                            row[1 + NUM_QUANTITATIVE + (i - NUM_QUANTITATIVE) * 3 + label.index()] =
                                1.0;
                        }
                        _ => {}
                    }
                }
                (id, row)
            })
            .collect();

        let revealed: Vec<(u32, f64)> = obs
            .robots
            .iter()
            .filter_map(|r| r.productivity.map(|p| (r.id, p)))
            .collect();
        let fallback = if revealed.is_empty() {
            1.0
        } else {
            revealed.iter().map(|r| r.1).sum::<f64>() / revealed.len() as f64
        };
        let training: Vec<(&DVector<f64>, f64)> = revealed
            .iter()
            .filter_map(|&(id, p)| features.get(&id).map(|f| (f, p)))
            .collect();
        let coefficients = (training.len() >= MIN_TRAINING).then(|| {
            let x = DMatrix::from_fn(training.len(), FEATURES, |r, c| training[r].0[c]);
            let y = DVector::from_iterator(training.len(), training.iter().map(|t| t.1));
            let mut gram = x.transpose() * &x;
            for i in 1..FEATURES {
                gram[(i, i)] += RIDGE;
            }
            gram.cholesky().map(|ch| ch.solve(&(x.transpose() * y)))
        });
        Self {
            coefficients: coefficients.flatten(),
            features,
            fallback,
        }
    }

    fn estimate(&self, robot: u32) -> f64 {
        match (&self.coefficients, self.features.get(&robot)) {
            (Some(beta), Some(row)) => beta.dot(row),
            _ => self.fallback,
        }
    }
}

#[cfg(test)]
mod tests;
