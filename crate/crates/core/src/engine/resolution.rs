//! The friendship-game decision table and the social-network vote.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::EngineError;

/// A team's guess for a robot; `Decline` travels on the wire as `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub enum Guess {
    Decline,
    Value(u8),
}

impl Guess {
    pub const DECLINE_WIRE: i64 = -1;

    pub fn from_wire(raw: i64) -> Result<Self, EngineError> {
        match raw {
            Self::DECLINE_WIRE => Ok(Guess::Decline),
            0..=100 => Ok(Guess::Value(raw as u8)),
            _ => Err(EngineError::InvalidGuess(raw)),
        }
    }

    pub fn to_wire(self) -> i64 {
        match self {
            Guess::Decline => Self::DECLINE_WIRE,
            Guess::Value(v) => v as i64,
        }
    }

    pub fn value(self) -> Option<u8> {
        match self {
            Guess::Decline => None,
            Guess::Value(v) => Some(v),
        }
    }
}

impl TryFrom<i64> for Guess {
    type Error = EngineError;

    fn try_from(raw: i64) -> Result<Self, EngineError> {
        Guess::from_wire(raw)
    }
}

impl From<Guess> for i64 {
    fn from(g: Guess) -> i64 {
        g.to_wire()
    }
}

impl fmt::Display for Guess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guess::Decline => f.write_str("decline"),
            Guess::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    BothDeclined,
    SoleBidder,
    ClosestOutsideThreshold,
    NetworkDecision,
    CoinFlip,
}

impl Reason {
    pub const ALL: [Reason; 5] = [
        Reason::BothDeclined,
        Reason::SoleBidder,
        Reason::ClosestOutsideThreshold,
        Reason::NetworkDecision,
        Reason::CoinFlip,
    ];
}

/// First-stage result of the decision table, before any network vote.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    PowerDown,
    /// Team slot (0 or 1) and the rule that awarded it.
    Award(usize, Reason),
    /// Both guesses are close (or equally far): the robot asks its friends.
    Network,
}

/// Applies the three friendship-game rules to the two teams' guesses.
///
/// Missing bids should be passed as `Decline`. "Within the threshold" is
/// inclusive, and equal distances go to the network.
pub fn decide(truth: u8, guesses: [Guess; 2], threshold: u32) -> Verdict {
    match (guesses[0].value(), guesses[1].value()) {
        (None, None) => Verdict::PowerDown,
        (Some(_), None) => Verdict::Award(0, Reason::SoleBidder),
        (None, Some(_)) => Verdict::Award(1, Reason::SoleBidder),
        (Some(a), Some(b)) => {
            let da = a.abs_diff(truth) as u32;
            let db = b.abs_diff(truth) as u32;
            if da == db || (da <= threshold && db <= threshold) {
                Verdict::Network
            } else if da < db {
                Verdict::Award(0, Reason::ClosestOutsideThreshold)
            } else {
                Verdict::Award(1, Reason::ClosestOutsideThreshold)
            }
        }
    }
}

/// Degree-weighted vote: the strictly larger total wins, equal totals tie.
pub fn weighted_vote(totals: [f64; 2]) -> Option<usize> {
    if totals[0] > totals[1] {
        Some(0)
    } else if totals[1] > totals[0] {
        Some(1)
    } else {
        None
    }
}

/// Sums each team's neighbor weights. `claims` pairs each already-claimed
/// neighbor's team slot with its weight (its degree).
pub fn vote_totals(claims: impl IntoIterator<Item = (usize, f64)>) -> [f64; 2] {
    let mut totals = [0.0; 2];
    for (slot, weight) in claims {
        totals[slot] += weight;
    }
    totals
}
