//! Tick-based game engine.
//!
//! A [`GameState`] is a single-owner state machine: callers feed it bids,
//! interest updates and `step` commands in order, and every accepted command
//! plus everything it causes is appended to the match log.

pub mod hacker;
pub mod log;
pub mod resolution;
pub mod snapshot;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::canonical::{sha256_hex, to_canonical_json};
use crate::error::EngineError;
use crate::matchgen::parts::part_index;
use crate::matchgen::MatchData;
use crate::rng::{stream_rng, Stream};

pub use hacker::{Drop, InterestSet, PartItem, SeriesItem};
pub use log::{Event, LogEntry, MatchLog};
pub use resolution::{decide, vote_totals, weighted_vote, Guess, Reason, Verdict};
pub use snapshot::{PublicRobot, PublicSnapshot, TeamView};

use hacker::HackerPools;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum RobotStatus {
    Pending,
    Claimed { team: String },
    PoweredDown,
}

impl RobotStatus {
    pub fn is_pending(&self) -> bool {
        matches!(self, RobotStatus::Pending)
    }

    pub fn claimed_by(&self) -> Option<&str> {
        match self {
            RobotStatus::Claimed { team } => Some(team),
            _ => None,
        }
    }
}

/// Who won a robot and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionOutcome {
    pub robot_id: u32,
    pub tick: u32,
    pub truth: u8,
    /// Effective guesses of both teams; a missing bid is recorded as decline.
    pub guesses: BTreeMap<String, Guess>,
    pub winner: Option<String>,
    pub reason: Reason,
    /// Degree totals of already-claimed neighbors, when the network was asked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network_totals: Option<BTreeMap<String, f64>>,
    pub productivity: f64,
}

/// Acknowledgment of an accepted command: the tick it took effect at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ack {
    pub tick: u32,
}

/// Everything one `step` produced.
#[derive(Debug, Clone, PartialEq)]
pub struct TickEvents {
    pub tick: u32,
    pub drops: Vec<Drop>,
    pub resolutions: Vec<ResolutionOutcome>,
    pub final_scores: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone)]
pub struct GameState {
    data: Arc<MatchData>,
    teams: [String; 2],
    engine_seed: u64,
    tick: u32,
    status: Vec<RobotStatus>,
    bids: [BTreeMap<u32, Guess>; 2],
    interests: [InterestSet; 2],
    pools: [HackerPools; 2],
    drops: [Vec<Drop>; 2],
    outcomes: Vec<ResolutionOutcome>,
    log: MatchLog,
    rng: ChaCha8Rng,
    finished: bool,
}

/// Sums productivity over the robots claimed by `team`, in robot id order.
/// Every score in the system is computed this way so totals agree bit for bit.
pub fn claimed_total<'a>(
    statuses: impl IntoIterator<Item = &'a RobotStatus>,
    productivity: impl Fn(usize) -> f64,
    team: &str,
) -> f64 {
    statuses
        .into_iter()
        .enumerate()
        .filter(|(_, s)| s.claimed_by() == Some(team))
        .map(|(i, _)| productivity(i))
        .fold(0.0, |acc, p| acc + p)
}

impl GameState {
    /// Starts a match between two distinct teams. Teams are kept in name
    /// order, which fixes the order of per-team events within a tick.
    pub fn new(
        data: Arc<MatchData>,
        team_a: &str,
        team_b: &str,
        engine_seed: u64,
    ) -> Result<Self, EngineError> {
        if team_a == team_b {
            return Err(EngineError::DuplicateTeam(team_a.to_string()));
        }
        let mut teams = [team_a.to_string(), team_b.to_string()];
        teams.sort();
        let pools = HackerPools::new(&data);
        let mut log = MatchLog::new();
        log.push(
            0,
            Event::MatchStarted {
                match_hash: data.content_hash(),
                config: data.config.clone(),
                teams: teams.clone(),
                engine_seed,
            },
        );
        Ok(Self {
            status: vec![RobotStatus::Pending; data.num_robots()],
            teams,
            engine_seed,
            tick: 0,
            bids: Default::default(),
            interests: Default::default(),
            pools: [pools.clone(), pools],
            drops: Default::default(),
            outcomes: Vec::new(),
            log,
            rng: stream_rng(engine_seed, Stream::Engine),
            finished: false,
            data,
        })
    }

    pub fn match_data(&self) -> &Arc<MatchData> {
        &self.data
    }

    pub fn teams(&self) -> &[String; 2] {
        &self.teams
    }

    pub fn engine_seed(&self) -> u64 {
        self.engine_seed
    }

    pub fn tick(&self) -> u32 {
        self.tick
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn log(&self) -> &MatchLog {
        &self.log
    }

    pub fn statuses(&self) -> &[RobotStatus] {
        &self.status
    }

    pub fn status(&self, robot_id: u32) -> Option<&RobotStatus> {
        self.status.get(robot_id as usize)
    }

    pub fn outcomes(&self) -> &[ResolutionOutcome] {
        &self.outcomes
    }

    pub fn slot(&self, team: &str) -> Result<usize, EngineError> {
        self.teams
            .iter()
            .position(|t| t == team)
            .ok_or_else(|| EngineError::UnknownTeam(team.to_string()))
    }

    pub fn drops(&self, team: &str) -> Result<&[Drop], EngineError> {
        Ok(&self.drops[self.slot(team)?])
    }

    pub fn bids(&self, team: &str) -> Result<&BTreeMap<u32, Guess>, EngineError> {
        Ok(&self.bids[self.slot(team)?])
    }

    pub fn interests(&self, team: &str) -> Result<&InterestSet, EngineError> {
        Ok(&self.interests[self.slot(team)?])
    }

    /// Undelivered series points about `robot_id` left for `team`.
    pub fn series_pool_remaining(&self, team: &str, robot_id: u32) -> Result<usize, EngineError> {
        Ok(self.pools[self.slot(team)?].series_remaining(robot_id))
    }

    /// Undelivered (series, part) items left for `team`.
    pub fn pool_remaining(&self, team: &str) -> Result<(usize, usize), EngineError> {
        Ok(self.pools[self.slot(team)?].total_remaining())
    }

    pub fn score(&self, team: &str) -> Result<f64, EngineError> {
        self.slot(team)?;
        Ok(claimed_total(&self.status, |i| self.data.robots[i].productivity, team))
    }

    pub fn scores(&self) -> BTreeMap<String, f64> {
        self.teams
            .iter()
            .map(|t| {
                let total = claimed_total(&self.status, |i| self.data.robots[i].productivity, t);
                (t.clone(), total)
            })
            .collect()
    }

    fn robot_exists(&self, robot_id: u32) -> Result<(), EngineError> {
        if (robot_id as usize) < self.status.len() {
            Ok(())
        } else {
            Err(EngineError::UnknownRobot(robot_id))
        }
    }

    /// Places or replaces `team`'s guess for a robot. `guess` uses the wire
    /// encoding: `0..=100`, or `-1` to decline.
    pub fn submit_bid(&mut self, team: &str, robot_id: u32, guess: i64) -> Result<Ack, EngineError> {
        let slot = self.slot(team)?;
        if self.finished {
            return Err(EngineError::Finished);
        }
        self.robot_exists(robot_id)?;
        let guess = Guess::from_wire(guess)?;
        let expiration_tick = self.data.robots[robot_id as usize].expiration_tick;
        if !self.status[robot_id as usize].is_pending() || self.tick >= expiration_tick {
            return Err(EngineError::LateBid {
                robot_id,
                expiration_tick,
            });
        }
        self.bids[slot].insert(robot_id, guess);
        self.log.push(
            self.tick,
            Event::BidSubmitted {
                team: self.teams[slot].clone(),
                robot_id,
                guess,
            },
        );
        Ok(Ack { tick: self.tick })
    }

    /// Replaces `team`'s hacker interests; the next drop uses them.
    pub fn submit_interests(
        &mut self,
        team: &str,
        robot_ids: Vec<u32>,
        part_names: Vec<String>,
    ) -> Result<Ack, EngineError> {
        let slot = self.slot(team)?;
        if self.finished {
            return Err(EngineError::Finished);
        }
        for &id in &robot_ids {
            self.robot_exists(id)?;
        }
        if let Some(bad) = part_names.iter().find(|p| part_index(p).is_none()) {
            return Err(EngineError::UnknownPart(bad.clone()));
        }
        self.log.push(
            self.tick,
            Event::InterestsUpdated {
                team: self.teams[slot].clone(),
                robot_ids: robot_ids.clone(),
                part_names: part_names.clone(),
            },
        );
        self.interests[slot] = InterestSet {
            robot_ids,
            part_names,
            updated_tick: self.tick,
        };
        Ok(Ack { tick: self.tick })
    }

    /// Draws and records `team`'s drop for the current tick.
    pub fn hacker_drop(&mut self, team: &str) -> Result<Drop, EngineError> {
        let slot = self.slot(team)?;
        let drop = self.pools[slot].draw(
            &mut self.rng,
            &self.data,
            &self.interests[slot],
            &self.teams[slot],
            self.tick,
        );
        self.drops[slot].push(drop.clone());
        self.log.push(self.tick, Event::DropDelivered { drop: drop.clone() });
        Ok(drop)
    }

    /// Degree-weighted vote among the robot's already-claimed neighbors.
    /// Returns the winning slot (`None` on a tie) and the per-slot totals.
    pub fn network_decision(&self, robot_id: u32) -> (Option<usize>, [f64; 2]) {
        let net = &self.data.network;
        let claims = net.neighbors(robot_id).iter().filter_map(|&nbr| {
            let team = self.status[nbr as usize].claimed_by()?;
            let slot = self.teams.iter().position(|t| t == team)?;
            Some((slot, net.degree(nbr) as f64))
        });
        let totals = vote_totals(claims);
        (weighted_vote(totals), totals)
    }

    /// Settles a robot at its expiration tick.
    pub fn resolve(&mut self, robot_id: u32) -> Result<ResolutionOutcome, EngineError> {
        self.robot_exists(robot_id)?;
        if !self.status[robot_id as usize].is_pending() {
            return Err(EngineError::NotPending(robot_id));
        }
        let robot = &self.data.robots[robot_id as usize];
        if robot.expiration_tick != self.tick {
            return Err(EngineError::NotExpiring {
                robot_id,
                expiration_tick: robot.expiration_tick,
                tick: self.tick,
            });
        }
        let truth = self.data.truth(robot_id);
        let guesses: [Guess; 2] = std::array::from_fn(|slot| {
            self.bids[slot]
                .get(&robot_id)
                .copied()
                .unwrap_or(Guess::Decline)
        });

        let mut network_totals = None;
        let (winner, reason) = match decide(truth, guesses, self.data.config.proximity_threshold) {
            Verdict::PowerDown => (None, Reason::BothDeclined),
            Verdict::Award(slot, reason) => (Some(slot), reason),
            Verdict::Network => {
                let (vote, totals) = self.network_decision(robot_id);
                network_totals = Some(
                    self.teams
                        .iter()
                        .cloned()
                        .zip(totals)
                        .collect::<BTreeMap<_, _>>(),
                );
                match vote {
                    Some(slot) => (Some(slot), Reason::NetworkDecision),
                    None => {
                        let slot = usize::from(self.rng.random_bool(0.5));
                        (Some(slot), Reason::CoinFlip)
                    }
                }
            }
        };

        self.status[robot_id as usize] = match winner {
            Some(slot) => RobotStatus::Claimed {
                team: self.teams[slot].clone(),
            },
            None => RobotStatus::PoweredDown,
        };
        let outcome = ResolutionOutcome {
            robot_id,
            tick: self.tick,
            truth,
            guesses: self.teams.iter().cloned().zip(guesses).collect(),
            winner: winner.map(|slot| self.teams[slot].clone()),
            reason,
            network_totals,
            productivity: robot.productivity,
        };
        self.outcomes.push(outcome.clone());
        self.log.push(
            self.tick,
            Event::RobotResolved {
                outcome: outcome.clone(),
            },
        );
        Ok(outcome)
    }

    /// Advances one tick: delivers one drop per team (in team name order),
    /// resolves every robot expiring at the new tick (in id order), and
    /// closes the match after the last tick.
    pub fn step(&mut self) -> Result<TickEvents, EngineError> {
        if self.finished {
            return Err(EngineError::Finished);
        }
        self.tick += 1;
        self.log.push(self.tick, Event::TickAdvanced);

        let teams = self.teams.clone();
        let mut drops = Vec::with_capacity(2);
        for team in &teams {
            drops.push(self.hacker_drop(team)?);
        }

        let expiring: Vec<u32> = self
            .data
            .robots
            .iter()
            .filter(|r| r.expiration_tick == self.tick && self.status[r.id as usize].is_pending())
            .map(|r| r.id)
            .collect();
        let mut resolutions = Vec::with_capacity(expiring.len());
        for id in expiring {
            resolutions.push(self.resolve(id)?);
        }

        let mut final_scores = None;
        if self.tick >= self.data.config.num_ticks {
            let scores = self.scores();
            self.log.push(
                self.tick,
                Event::MatchEnded {
                    scores: scores.clone(),
                },
            );
            self.finished = true;
            final_scores = Some(scores);
        }

        Ok(TickEvents {
            tick: self.tick,
            drops,
            resolutions,
            final_scores,
        })
    }

    /// Ends the match early, recording why. Robots still pending stay pending.
    pub fn abort(&mut self, reason: &str) -> Result<(), EngineError> {
        if self.finished {
            return Err(EngineError::Finished);
        }
        self.log.push(
            self.tick,
            Event::MatchAborted {
                reason: reason.to_string(),
            },
        );
        self.finished = true;
        Ok(())
    }

    /// Digest of the observable state: tick, statuses, ledgers and log.
    pub fn state_digest(&self) -> String {
        #[derive(Serialize)]
        struct Digest<'a> {
            tick: u32,
            finished: bool,
            status: &'a [RobotStatus],
            bids: &'a [BTreeMap<u32, Guess>; 2],
            interests: &'a [InterestSet; 2],
            log_hash: String,
        }
        sha256_hex(
            to_canonical_json(&Digest {
                tick: self.tick,
                finished: self.finished,
                status: &self.status,
                bids: &self.bids,
                interests: &self.interests,
                log_hash: self.log.hash(),
            })
            .as_bytes(),
        )
    }
}

/// Convenience wrapper matching the engine's entry operation.
pub fn init_game(
    data: Arc<MatchData>,
    team_a: &str,
    team_b: &str,
    engine_seed: u64,
) -> Result<GameState, EngineError> {
    GameState::new(data, team_a, team_b, engine_seed)
}
