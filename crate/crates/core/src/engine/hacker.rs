//! Per-team data leaks: each tick a team's hacker hands over a few series
//! points and part readings it has not delivered before, favoring whatever
//! the team asked about.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::matchgen::parts::{PartValue, NUM_PARTS, PARTS};
use crate::matchgen::MatchData;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterestSet {
    pub robot_ids: Vec<u32>,
    pub part_names: Vec<String>,
    pub updated_tick: u32,
}

impl InterestSet {
    pub fn is_empty(&self) -> bool {
        self.robot_ids.is_empty() && self.part_names.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesItem {
    pub robot_id: u32,
    pub t: u32,
    pub value: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartItem {
    pub robot_id: u32,
    pub part: String,
    pub value: PartValue,
}

/// One tick's delivery to one team.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Drop {
    pub team: String,
    pub tick: u32,
    pub series_items: Vec<SeriesItem>,
    pub part_items: Vec<PartItem>,
}

/// Undelivered data for one team, kept per robot.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct HackerPools {
    series: Vec<Vec<u32>>,
    parts: Vec<Vec<u8>>,
}

/// Interest filter resolved to lookup tables.
struct Focus {
    robots: Vec<bool>,
    parts: [bool; NUM_PARTS],
    any_robot: bool,
    any_part: bool,
}

impl Focus {
    fn new(interests: &InterestSet, num_robots: usize) -> Self {
        let mut robots = vec![false; num_robots];
        for &id in &interests.robot_ids {
            if let Some(slot) = robots.get_mut(id as usize) {
                *slot = true;
            }
        }
        let mut parts = [false; NUM_PARTS];
        for name in &interests.part_names {
            if let Some(i) = PARTS.iter().position(|p| p.name == name) {
                parts[i] = true;
            }
        }
        Self {
            any_robot: robots.iter().any(|&b| b),
            any_part: parts.iter().any(|&b| b),
            robots,
            parts,
        }
    }
}

impl HackerPools {
    /// Every series point except each robot's expiration-tick value, and
    /// every part reading.
    pub(crate) fn new(data: &MatchData) -> Self {
        let ticks = data.config.num_ticks;
        let series = data
            .robots
            .iter()
            .map(|r| (0..ticks).filter(|&t| t != r.expiration_tick).collect())
            .collect();
        let parts = data
            .robots
            .iter()
            .map(|_| (0..NUM_PARTS as u8).collect())
            .collect();
        Self { series, parts }
    }

    pub(crate) fn series_remaining(&self, robot: u32) -> usize {
        self.series[robot as usize].len()
    }

    pub(crate) fn total_remaining(&self) -> (usize, usize) {
        (
            self.series.iter().map(Vec::len).sum(),
            self.parts.iter().map(Vec::len).sum(),
        )
    }

    /// Draws one drop. For each item a biased coin (probability `bias`)
    /// decides whether to draw from the interest-constrained pool; an empty
    /// constrained pool falls back to the global pool. The coin is flipped
    /// even without interests so that a vacuous interest set consumes the
    /// same randomness as none at all.
    pub(crate) fn draw<R: RngCore>(
        &mut self,
        rng: &mut R,
        data: &MatchData,
        interests: &InterestSet,
        team: &str,
        tick: u32,
    ) -> Drop {
        let focus = Focus::new(interests, data.num_robots());
        let bias = data.config.bias_probability;

        let mut series_items = Vec::with_capacity(data.config.drops_per_tick_series);
        for _ in 0..data.config.drops_per_tick_series {
            let biased = rng.random_bool(bias);
            let mut pick = None;
            if biased && focus.any_robot {
                pick = take_nth_by_robot(&mut self.series, rng, |robot| focus.robots[robot]);
            }
            let Some((robot, t)) =
                pick.or_else(|| take_nth_by_robot(&mut self.series, rng, |_| true))
            else {
                break;
            };
            series_items.push(SeriesItem {
                robot_id: robot as u32,
                t,
                value: data.series.value(robot as u32, t),
            });
        }

        let mut part_items = Vec::with_capacity(data.config.drops_per_tick_parts);
        for _ in 0..data.config.drops_per_tick_parts {
            let biased = rng.random_bool(bias);
            let mut pick = None;
            if biased && (focus.any_robot || focus.any_part) {
                pick = take_nth(&mut self.parts, rng, |robot, &part| {
                    focus.robots[robot] || focus.parts[part as usize]
                });
            }
            let Some((robot, part)) =
                pick.or_else(|| take_nth(&mut self.parts, rng, |_, _| true))
            else {
                break;
            };
            part_items.push(PartItem {
                robot_id: robot as u32,
                part: PARTS[part as usize].name.to_string(),
                value: data.robots[robot].parts.get(part as usize),
            });
        }

        Drop {
            team: team.to_string(),
            tick,
            series_items,
            part_items,
        }
    }
}

/// Like [`take_nth`] for filters that only look at the robot, which lets the
/// count use list lengths.
fn take_nth_by_robot<T: Copy, R: RngCore>(
    pools: &mut [Vec<T>],
    rng: &mut R,
    keep: impl Fn(usize) -> bool,
) -> Option<(usize, T)> {
    let count: usize = pools
        .iter()
        .enumerate()
        .filter(|&(robot, _)| keep(robot))
        .map(|(_, items)| items.len())
        .sum();
    if count == 0 {
        return None;
    }
    let mut k = rng.random_range(0..count);
    for (robot, items) in pools.iter_mut().enumerate() {
        if !keep(robot) {
            continue;
        }
        if k < items.len() {
            return Some((robot, items.remove(k)));
        }
        k -= items.len();
    }
    unreachable!("k is below the number of qualifying items")
}

/// Removes and returns a uniformly chosen entry among those accepted by
/// `keep`, scanning robots in id order. Returns `None` without touching the
/// RNG when nothing qualifies.
fn take_nth<T: Copy, R: RngCore>(
    pools: &mut [Vec<T>],
    rng: &mut R,
    keep: impl Fn(usize, &T) -> bool,
) -> Option<(usize, T)> {
    let count: usize = pools
        .iter()
        .enumerate()
        .map(|(robot, items)| items.iter().filter(|item| keep(robot, item)).count())
        .sum();
    if count == 0 {
        return None;
    }
    let mut k = rng.random_range(0..count);
    for (robot, items) in pools.iter_mut().enumerate() {
        for i in 0..items.len() {
            if keep(robot, &items[i]) {
                if k == 0 {
                    return Some((robot, items.remove(i)));
                }
                k -= 1;
            }
        }
    }
    unreachable!("k is below the number of qualifying items")
}
