//! Summaries of a recorded match.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use roboviz_core::engine::{Event, MatchLog};
use roboviz_core::Reason;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchStats {
    pub teams: [String; 2],
    /// `trajectory[i]` holds both teams' scores after tick `i + 1`.
    pub trajectory: Vec<[f64; 2]>,
    pub claimed: BTreeMap<String, usize>,
    pub powered_down: usize,
    pub reasons: BTreeMap<Reason, usize>,
    pub final_scores: BTreeMap<String, f64>,
    pub finished: bool,
    pub aborted: bool,
}

/// Scores are re-added in robot id order at every tick, the same order the
/// engine sums in, so the last row equals the engine's totals exactly.
pub fn match_stats(log: &MatchLog) -> Option<MatchStats> {
    let (_, config, teams, _) = log.start()?;
    let teams = teams.clone();
    let mut claims: Vec<Option<(usize, f64)>> = vec![None; config.num_robots];
    let mut reasons: BTreeMap<Reason, usize> = Reason::ALL.iter().map(|&r| (r, 0)).collect();
    let mut powered_down = 0;
    let mut trajectory = Vec::new();
    let mut last_tick = 0;

    let totals = |claims: &[Option<(usize, f64)>]| {
        let mut sums = [0.0; 2];
        for &(slot, p) in claims.iter().flatten() {
            sums[slot] += p;
        }
        sums
    };

    for entry in log.entries() {
        if entry.tick > last_tick {
            // Close out every tick up to this one.
            while (trajectory.len() as u32) < entry.tick - 1 {
                trajectory.push(totals(&claims));
            }
            last_tick = entry.tick;
        }
        if let Event::RobotResolved { outcome } = &entry.event {
            *reasons.entry(outcome.reason).or_default() += 1;
            match &outcome.winner {
                Some(w) => {
                    let slot = teams.iter().position(|t| t == w)?;
                    claims[outcome.robot_id as usize] = Some((slot, outcome.productivity));
                }
                None => powered_down += 1,
            }
        }
    }
    while (trajectory.len() as u32) < last_tick {
        trajectory.push(totals(&claims));
    }

    let mut claimed = BTreeMap::new();
    let mut final_scores = BTreeMap::new();
    let end = totals(&claims);
    for (slot, team) in teams.iter().enumerate() {
        claimed.insert(
            team.clone(),
            claims.iter().flatten().filter(|(s, _)| *s == slot).count(),
        );
        final_scores.insert(team.clone(), end[slot]);
    }
    Some(MatchStats {
        teams,
        trajectory,
        claimed,
        powered_down,
        reasons,
        final_scores,
        finished: log.final_scores().is_some(),
        aborted: log.is_aborted(),
    })
}

impl MatchStats {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let [a, b] = &self.teams;
        writeln!(out, "tick\t{a}\t{b}").unwrap();
        for (i, [sa, sb]) in self.trajectory.iter().enumerate() {
            writeln!(out, "{}\t{sa}\t{sb}", i + 1).unwrap();
        }
        writeln!(out).unwrap();
        for team in &self.teams {
            writeln!(out, "claimed\t{team}\t{}", self.claimed[team]).unwrap();
        }
        writeln!(out, "powered_down\t{}", self.powered_down).unwrap();
        for (reason, n) in &self.reasons {
            writeln!(out, "reason\t{}\t{n}", reason_name(*reason)).unwrap();
        }
        for team in &self.teams {
            writeln!(out, "final\t{team}\t{}", self.final_scores[team]).unwrap();
        }
        if self.aborted {
            writeln!(out, "aborted").unwrap();
        } else if !self.finished {
            writeln!(out, "unfinished").unwrap();
        }
        out
    }
}

pub fn reason_name(reason: Reason) -> String {
    serde_json::to_value(reason)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_else(|| format!("{reason:?}"))
}
