//! What a team (or a spectator) is allowed to see.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::hacker::{Drop, InterestSet};
use crate::engine::resolution::{Guess, Reason};
use crate::engine::{GameState, RobotStatus};
use crate::error::EngineError;
use crate::matchgen::parts::PARTS;
use crate::matchgen::{FamilyTree, SocialNetwork};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicRobot {
    pub id: u32,
    pub name: String,
    pub expiration_tick: u32,
    pub status: RobotStatus,
    /// Revealed only once the robot has been resolved.
    pub productivity: Option<f64>,
    pub reason: Option<Reason>,
}

/// The requesting team's private view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamView {
    pub team: String,
    pub bids: BTreeMap<u32, Guess>,
    pub interests: InterestSet,
    pub drops: Vec<Drop>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicSnapshot {
    pub tick: u32,
    pub num_ticks: u32,
    pub tick_seconds: f64,
    pub proximity_threshold: u32,
    pub finished: bool,
    pub teams: [String; 2],
    pub scores: BTreeMap<String, f64>,
    pub robots: Vec<PublicRobot>,
    pub part_names: Vec<String>,
    pub network: SocialNetwork,
    pub tree: FamilyTree,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub own: Option<TeamView>,
}

impl PublicSnapshot {
    pub fn robot(&self, id: u32) -> Option<&PublicRobot> {
        self.robots.get(id as usize)
    }

    /// Pending robots with `tick < expiration <= tick + horizon`, soonest first.
    pub fn expiring_within(&self, horizon: u32) -> Vec<&PublicRobot> {
        let mut list: Vec<&PublicRobot> = self
            .robots
            .iter()
            .filter(|r| {
                r.status.is_pending()
                    && r.expiration_tick > self.tick
                    && r.expiration_tick <= self.tick + horizon
            })
            .collect();
        list.sort_by_key(|r| (r.expiration_tick, r.id));
        list
    }
}

impl GameState {
    /// Snapshot for `team`, or a spectator snapshot when `team` is `None`.
    pub fn public_snapshot(&self, team: Option<&str>) -> Result<PublicSnapshot, EngineError> {
        let own = match team {
            Some(team) => {
                let slot = self.slot(team)?;
                Some(TeamView {
                    team: self.teams[slot].clone(),
                    bids: self.bids[slot].clone(),
                    interests: self.interests[slot].clone(),
                    drops: self.drops[slot].clone(),
                })
            }
            None => None,
        };
        let data = self.match_data();
        let reasons: BTreeMap<u32, Reason> = self
            .outcomes
            .iter()
            .map(|o| (o.robot_id, o.reason))
            .collect();
        let robots = data
            .robots
            .iter()
            .zip(&self.status)
            .map(|(r, status)| PublicRobot {
                id: r.id,
                name: r.name.clone(),
                expiration_tick: r.expiration_tick,
                status: status.clone(),
                productivity: (!status.is_pending()).then_some(r.productivity),
                reason: reasons.get(&r.id).copied(),
            })
            .collect();
        Ok(PublicSnapshot {
            tick: self.tick,
            num_ticks: data.config.num_ticks,
            tick_seconds: data.config.tick_seconds,
            proximity_threshold: data.config.proximity_threshold,
            finished: self.finished,
            teams: self.teams.clone(),
            scores: self.scores(),
            robots,
            part_names: PARTS.iter().map(|p| p.name.to_string()).collect(),
            network: data.network.clone(),
            tree: data.tree.clone(),
            own,
        })
    }
}
