use std::collections::BTreeMap;
use std::sync::Arc;

use super::*;
use crate::config::MatchConfig;
use crate::engine::{Event, GameState, Guess, RobotStatus};
use crate::matchgen::generate_match;

fn data(seed: u64) -> Arc<MatchData> {
    Arc::new(generate_match(&MatchConfig::with_seed(seed)).unwrap())
}

fn claimed(state: &GameState, team: &str) -> usize {
    state
        .statuses()
        .iter()
        .filter(|s| s.claimed_by() == Some(team))
        .count()
}

fn bids_in_log(state: &GameState, team: &str) -> Vec<(u32, Guess)> {
    state
        .log()
        .entries()
        .iter()
        .filter_map(|e| match &e.event {
            Event::BidSubmitted {
                team: t,
                robot_id,
                guess,
            } if t == team => Some((*robot_id, *guess)),
            _ => None,
        })
        .collect()
}

#[test]
fn exact_omniscient_bids_the_truth() {
    let d = data(1);
    let mut a = Bot::omniscient(d.clone(), 0, 1);
    let mut b = Bot::observer(BotPolicy::SeriesRegression { degree: 4 }, 2).unwrap();
    let state = run_headless(d.clone(), [("a", &mut a), ("b", &mut b)], 3).unwrap();
    let bids = bids_in_log(&state, "a");
    assert_eq!(bids.len(), 100, "one bid per robot");
    for (robot, guess) in bids {
        assert_eq!(guess, Guess::Value(d.truth(robot)));
    }
    assert_eq!(a.rejected(), 0);
    assert_eq!(b.rejected(), 0);
}

#[test]
fn noisy_omniscient_stays_in_range() {
    let d = data(2);
    let mut a = Bot::omniscient(d.clone(), 20, 1);
    let mut b = Bot::omniscient(d.clone(), 20, 2);
    let state = run_headless(d.clone(), [("a", &mut a), ("b", &mut b)], 3).unwrap();
    for (robot, guess) in bids_in_log(&state, "a") {
        let g = guess.value().unwrap() as i64;
        let t = d.truth(robot) as i64;
        assert!((g - t).abs() <= 20);
    }
}

#[test]
fn precise_bot_usually_claims_more() {
    let mut wins = 0;
    for seed in 0..20 {
        let d = data(seed);
        let mut sharp = Bot::omniscient(d.clone(), 0, seed);
        let mut sloppy = Bot::omniscient(d.clone(), 20, seed + 1000);
        let state = run_headless(d, [("sharp", &mut sharp), ("sloppy", &mut sloppy)], seed).unwrap();
        if claimed(&state, "sharp") > claimed(&state, "sloppy") {
            wins += 1;
        }
    }
    assert!(wins >= 18, "{wins}/20");
}

#[test]
fn filter_with_perfect_model_never_bids_on_losers() {
    let d = data(4);
    let hints: BTreeMap<u32, f64> = d.robots.iter().map(|r| (r.id, r.productivity)).collect();
    let mut filter = Bot::observer(BotPolicy::ProductivityFilter { degree: 4 }, 1)
        .unwrap()
        .with_productivity_hints(hints);
    let mut other = Bot::observer(BotPolicy::SeriesRegression { degree: 4 }, 2).unwrap();
    let state = run_headless(d.clone(), [("f", &mut filter), ("r", &mut other)], 5).unwrap();
    let bids = bids_in_log(&state, "f");
    assert!(!bids.is_empty());
    for (robot, guess) in bids {
        if d.robots[robot as usize].productivity < 0.0 {
            assert_eq!(guess, Guess::Decline, "robot {robot}");
        } else {
            assert!(guess.value().is_some());
        }
    }
}

#[test]
fn learned_filter_and_greedy_bots_play_cleanly() {
    let d = data(6);
    let mut filter = Bot::observer(BotPolicy::ProductivityFilter { degree: 4 }, 1).unwrap();
    let mut greedy = Bot::observer(BotPolicy::NetworkGreedy { degree: 3 }, 2).unwrap();
    let state = run_headless(d, [("f", &mut filter), ("g", &mut greedy)], 5).unwrap();
    assert!(state.is_finished());
    assert_eq!(filter.rejected(), 0);
    assert_eq!(greedy.rejected(), 0);
    assert!(claimed(&state, "f") + claimed(&state, "g") > 50);
    // Greedy asks about hubs.
    let asked = state.log().entries().iter().any(|e| {
        matches!(&e.event, Event::InterestsUpdated { team, robot_ids, .. } if team == "g" && !robot_ids.is_empty())
    });
    assert!(asked);
}

#[test]
fn regression_beats_a_passive_opponent() {
    let d = data(7);
    let mut reg = Bot::observer(BotPolicy::SeriesRegression { degree: 4 }, 1).unwrap();
    // A filter bot that believes every robot is unproductive never bids.
    let hints = d.robots.iter().map(|r| (r.id, -1.0)).collect();
    let mut passive = Bot::observer(BotPolicy::ProductivityFilter { degree: 4 }, 2)
        .unwrap()
        .with_productivity_hints(hints);
    let state = run_headless(d, [("reg", &mut reg), ("passive", &mut passive)], 5).unwrap();
    assert_eq!(claimed(&state, "passive"), 0);
    assert_eq!(claimed(&state, "reg"), 100);
    assert!(state.statuses().iter().all(|s| *s != RobotStatus::PoweredDown));
}

#[test]
fn error_range_updates() {
    let p = BotPolicy::Omniscient { error: 20 };
    assert_eq!(extend_error(p, 5), Ok(BotPolicy::Omniscient { error: 5 }));
    assert_eq!(extend_error(p, 0), Ok(BotPolicy::Omniscient { error: 0 }));
    assert_eq!(extend_error(p, -1), Err(BotError::NegativeError(-1)));
    assert!(matches!(
        extend_error(BotPolicy::SeriesRegression { degree: 4 }, 3),
        Err(BotError::NoErrorRange(_))
    ));

    // Same range, same seed: same behavior.
    let d = data(8);
    let play = |policy: BotPolicy| {
        let mut a = Bot::from_policy(policy, Some(d.clone()), 11).unwrap();
        let mut b = Bot::omniscient(d.clone(), 10, 12);
        run_headless(d.clone(), [("a", &mut a), ("b", &mut b)], 1)
            .unwrap()
            .log()
            .hash()
    };
    assert_eq!(play(p), play(extend_error(p, 20).unwrap()));
    assert_ne!(play(p), play(extend_error(p, 5).unwrap()));
}

#[test]
fn policy_specs_parse() {
    assert_eq!("omniscient:20".parse(), Ok(BotPolicy::Omniscient { error: 20 }));
    assert_eq!("omniscient".parse(), Ok(BotPolicy::Omniscient { error: 10 }));
    assert_eq!("regression".parse(), Ok(BotPolicy::SeriesRegression { degree: 4 }));
    assert_eq!("filter:2".parse(), Ok(BotPolicy::ProductivityFilter { degree: 2 }));
    assert_eq!("greedy".parse(), Ok(BotPolicy::NetworkGreedy { degree: 4 }));
    assert_eq!(
        "omniscient:-3".parse::<BotPolicy>(),
        Err(BotError::NegativeError(-3))
    );
    assert!("psychic".parse::<BotPolicy>().is_err());
    let p: BotPolicy = "greedy:3".parse().unwrap();
    assert_eq!(p.to_string().parse(), Ok(p));
}

#[test]
fn observers_cannot_hold_the_truth() {
    assert_eq!(
        Bot::observer(BotPolicy::Omniscient { error: 0 }, 1).unwrap_err(),
        BotError::NotAnObserver
    );
    assert_eq!(
        Bot::from_policy(BotPolicy::Omniscient { error: 0 }, None, 1).unwrap_err(),
        BotError::MissingTruth
    );
}

#[test]
fn bot_runs_are_deterministic() {
    let d = data(9);
    let run = || {
        let mut a = Bot::observer(BotPolicy::ProductivityFilter { degree: 4 }, 3).unwrap();
        let mut b = Bot::omniscient(d.clone(), 15, 4);
        run_headless(d.clone(), [("a", &mut a), ("b", &mut b)], 2)
            .unwrap()
            .log()
            .hash()
    };
    assert_eq!(run(), run());
}
