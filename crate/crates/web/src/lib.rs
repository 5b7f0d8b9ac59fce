//! Browser bindings. Each export returns a JSON string for the page to draw.

use std::collections::BTreeMap;
use std::sync::Arc;

use roboviz_core::engine::{decide, Verdict};
use roboviz_core::{generate_match, GameState, Guess, MatchConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct RobotView {
    id: u32,
    name: String,
    expiration_tick: u32,
    truth: u8,
    productivity: f64,
    degree: usize,
    parent: Option<u32>,
}

#[derive(Serialize)]
struct Preview {
    content_hash: String,
    robots: Vec<RobotView>,
    series: Vec<Vec<u8>>,
    edges: Vec<[u32; 2]>,
    tree_root: u32,
    tree_children: BTreeMap<u32, Vec<u32>>,
}

/// Generates a match and returns robots, series, network and tree.
pub fn preview(seed: u64, variant: &str) -> Result<String, String> {
    let config = MatchConfig::with_seed(seed)
        .apply_variant(variant)
        .map_err(|e| e.to_string())?;
    let d = generate_match(&config).map_err(|e| e.to_string())?;
    let robots = d
        .robots
        .iter()
        .map(|r| RobotView {
            id: r.id,
            name: r.name.clone(),
            expiration_tick: r.expiration_tick,
            truth: d.truth(r.id),
            productivity: r.productivity,
            degree: d.network.degree(r.id),
            parent: d.tree.parent(r.id),
        })
        .collect();
    let tree_children = d
        .tree
        .internal_nodes()
        .map(|n| (n, d.tree.children(n).to_vec()))
        .collect();
    let preview = Preview {
        content_hash: d.content_hash(),
        robots,
        series: d.series.values.clone(),
        edges: d.network.edges().collect(),
        tree_root: d.tree.root(),
        tree_children,
    };
    serde_json::to_string(&preview).map_err(|e| e.to_string())
}

/// Cell codes of the resolution grid.
pub const POWER_DOWN: u8 = 0;
pub const A_SOLE: u8 = 1;
pub const B_SOLE: u8 = 2;
pub const A_CLOSER: u8 = 3;
pub const B_CLOSER: u8 = 4;
pub const NETWORK: u8 = 5;

#[derive(Serialize)]
struct Grid {
    truth: u8,
    threshold: u32,
    /// Guesses along each axis, `-1` first.
    size: usize,
    /// Row-major, row = A's guess, column = B's guess.
    cells: Vec<u8>,
}

pub fn grid(truth: u8, threshold: u32) -> Result<String, String> {
    if truth > 100 {
        return Err(format!("truth {truth} is outside 0..=100"));
    }
    let mut cells = Vec::with_capacity(102 * 102);
    for a in -1..=100 {
        for b in -1..=100 {
            let guesses = [Guess::from_wire(a).unwrap(), Guess::from_wire(b).unwrap()];
            cells.push(match decide(truth, guesses, threshold) {
                Verdict::PowerDown => POWER_DOWN,
                Verdict::Award(0, roboviz_core::Reason::SoleBidder) => A_SOLE,
                Verdict::Award(_, roboviz_core::Reason::SoleBidder) => B_SOLE,
                Verdict::Award(0, _) => A_CLOSER,
                Verdict::Award(_, _) => B_CLOSER,
                Verdict::Network => NETWORK,
            });
        }
    }
    serde_json::to_string(&Grid {
        truth,
        threshold,
        size: 102,
        cells,
    })
    .map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct TickShare {
    tick: u32,
    interested: usize,
    total: usize,
    remaining: usize,
}

#[derive(Serialize)]
struct HackerRun {
    robot: u32,
    bias: f64,
    ticks: Vec<TickShare>,
    /// Interested share while the robot still had a full drop left.
    share: f64,
}

/// Plays a match with no bids where team `a` asks the hacker about one
/// robot, and reports how many series items each tick concerned it.
pub fn hacker(seed: u64, robot: u32, bias: f64) -> Result<String, String> {
    let mut config = MatchConfig::with_seed(seed);
    config.bias_probability = bias;
    let d = Arc::new(generate_match(&config).map_err(|e| e.to_string())?);
    let mut state = GameState::new(d, "a", "b", seed).map_err(|e| e.to_string())?;
    state
        .submit_interests("a", vec![robot], Vec::new())
        .map_err(|e| e.to_string())?;
    let mut ticks = Vec::new();
    let (mut hits, mut total) = (0, 0);
    while !state.is_finished() {
        let before = state.series_pool_remaining("a", robot).map_err(|e| e.to_string())?;
        let events = state.step().map_err(|e| e.to_string())?;
        let drop = events.drops.iter().find(|d| d.team == "a").expect("team a drop");
        let interested = drop.series_items.iter().filter(|i| i.robot_id == robot).count();
        if before >= drop.series_items.len().max(1) {
            hits += interested;
            total += drop.series_items.len();
        }
        ticks.push(TickShare {
            tick: events.tick,
            interested,
            total: drop.series_items.len(),
            remaining: state.series_pool_remaining("a", robot).map_err(|e| e.to_string())?,
        });
    }
    let share = if total == 0 { 0.0 } else { hits as f64 / total as f64 };
    serde_json::to_string(&HackerRun {
        robot,
        bias,
        ticks,
        share,
    })
    .map_err(|e| e.to_string())
}

// Seeds cross the boundary as u32 so the page can pass plain numbers.

#[wasm_bindgen]
pub fn preview_match(seed: u32, variant: &str) -> Result<String, JsValue> {
    preview(seed as u64, variant).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn resolution_grid(truth: u8, threshold: u32) -> Result<String, JsValue> {
    grid(truth, threshold).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn hacker_bias(seed: u32, robot: u32, bias: f64) -> Result<String, JsValue> {
    hacker(seed as u64, robot, bias).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use serde_json::Value;

    use super::*;

    #[test]
    fn preview_has_every_panel() {
        let v: Value = serde_json::from_str(&preview(3, "standard").unwrap()).unwrap();
        assert_eq!(v["robots"].as_array().unwrap().len(), 100);
        assert_eq!(v["series"].as_array().unwrap().len(), 100);
        assert_eq!(v["edges"].as_array().unwrap().len(), 196);
        let kids: usize = v["tree_children"]
            .as_object()
            .unwrap()
            .values()
            .map(|c| c.as_array().unwrap().len())
            .sum();
        // Every node but the root is someone's child.
        assert_eq!(kids, 100 + v["tree_children"].as_object().unwrap().len() - 1);
        assert!(preview(3, "sideways").is_err());
    }

    #[test]
    fn grid_cells_follow_the_rules() {
        let v: Value = serde_json::from_str(&grid(92, 10).unwrap()).unwrap();
        let cells: Vec<u8> = serde_json::from_value(v["cells"].clone()).unwrap();
        assert_eq!(cells.len(), 102 * 102);
        let at = |a: i64, b: i64| cells[((a + 1) * 102 + (b + 1)) as usize];
        assert_eq!(at(-1, -1), POWER_DOWN);
        assert_eq!(at(91, -1), A_SOLE);
        assert_eq!(at(-1, 3), B_SOLE);
        assert_eq!(at(91, 85), NETWORK);
        assert_eq!(at(91, 60), A_CLOSER);
        assert_eq!(at(10, 70), B_CLOSER);
        assert_eq!(at(90, 94), NETWORK);
        assert!(grid(101, 10).is_err());
    }

    #[test]
    fn hacker_share_tracks_the_bias() {
        let v: Value = serde_json::from_str(&hacker(4, 12, 0.8).unwrap()).unwrap();
        assert_eq!(v["ticks"].as_array().unwrap().len(), 100);
        let share = v["share"].as_f64().unwrap();
        assert!(share > 0.55 && share < 1.0, "{share}");
        let none: Value = serde_json::from_str(&hacker(4, 12, 0.0).unwrap()).unwrap();
        assert!(none["share"].as_f64().unwrap() < 0.2);
        assert!(hacker(4, 500, 0.8).is_err());
    }
}
