//! Friendship-game time series: one integer curve per robot, with relatives
//! sharing most of their polynomial shape.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::MatchConfig;
use crate::matchgen::tree::FamilyTree;

/// How strongly an internal node's base shape follows its parent's.
const INHERITANCE: f64 = 0.6;

/// Sinusoid added to the polynomial in the non-polynomial variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    pub amplitude: f64,
    /// Full cycles over the match.
    pub cycles: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesTable {
    /// `values[robot][tick]`, integers in `0..=100`.
    pub values: Vec<Vec<u8>>,
    /// Raw polynomial coefficients per robot, lowest order first, in the
    /// normalized time domain `x = 2t/(T-1) - 1`.
    pub coefficients: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waves: Option<Vec<Wave>>,
}

impl TimeSeriesTable {
    pub fn value(&self, robot: u32, tick: u32) -> u8 {
        self.values[robot as usize][tick as usize]
    }

    pub fn num_robots(&self) -> usize {
        self.values.len()
    }

    pub fn num_ticks(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }
}

/// Evaluates the unscaled curve at `tick`.
pub fn raw_value(coefficients: &[f64], wave: Option<&Wave>, tick: u32, num_ticks: u32) -> f64 {
    let span = (num_ticks.max(2) - 1) as f64;
    let x = 2.0 * tick as f64 / span - 1.0;
    let poly = coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c);
    match wave {
        Some(w) => poly + w.amplitude * (TAU * w.cycles * tick as f64 / span + w.phase).sin(),
        None => poly,
    }
}

/// Affinely maps `raw` onto `[0, 100]` and rounds. A flat curve maps to 50.
pub fn rescale_to_percent(raw: &[f64]) -> Vec<u8> {
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = hi - lo;
    raw.iter()
        .map(|&v| {
            if width <= f64::EPSILON * hi.abs().max(1.0) {
                50
            } else {
                ((v - lo) / width * 100.0).round().clamp(0.0, 100.0) as u8
            }
        })
        .collect()
}

fn normal<R: RngCore>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn draw_wave<R: RngCore>(rng: &mut R) -> Wave {
    Wave {
        amplitude: rng.random_range(0.5..1.5),
        cycles: rng.random_range(1.5..4.0),
        phase: rng.random_range(0.0..TAU),
    }
}

/// Draws a base shape for every internal node (each mostly inherited from
/// its parent), then gives each robot its parent's shape plus Gaussian noise
/// scaled by `sibling_noise_scale`.
pub fn gen_time_series<R: RngCore>(
    rng: &mut R,
    tree: &FamilyTree,
    config: &MatchConfig,
) -> TimeSeriesTable {
    let terms = config.poly_degree + 1;
    let noise = config.sibling_noise_scale;
    let fresh = (1.0 - INHERITANCE * INHERITANCE).sqrt();

    let mut bases: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    let mut node_waves: BTreeMap<u32, Wave> = BTreeMap::new();
    let mut coefficients = vec![Vec::new(); tree.num_robots()];
    let mut waves = vec![
        Wave {
            amplitude: 0.0,
            cycles: 0.0,
            phase: 0.0
        };
        tree.num_robots()
    ];

    for node in tree.top_down() {
        let parent = tree.parent(node);
        if tree.is_robot(node) {
            let parent = parent.expect("robots are never the root");
            let base = &bases[&parent];
            coefficients[node as usize] = base.iter().map(|&c| c + noise * normal(rng)).collect();
            if config.nonpolynomial_series {
                let w = node_waves[&parent];
                waves[node as usize] = Wave {
                    amplitude: (w.amplitude * (1.0 + noise * normal(rng))).max(0.0),
                    cycles: w.cycles,
                    phase: w.phase + noise * normal(rng),
                };
            }
        } else {
            let base = match parent.and_then(|p| bases.get(&p)) {
                Some(up) => up
                    .iter()
                    .map(|&c| INHERITANCE * c + fresh * normal(rng))
                    .collect(),
                None => (0..terms).map(|_| normal(rng)).collect(),
            };
            bases.insert(node, base);
            if config.nonpolynomial_series {
                node_waves.insert(node, draw_wave(rng));
            }
        }
    }

    let waves = config.nonpolynomial_series.then_some(waves);
    let values = (0..tree.num_robots())
        .map(|robot| {
            let wave = waves.as_ref().map(|w| &w[robot]);
            let raw: Vec<f64> = (0..config.num_ticks)
                .map(|t| raw_value(&coefficients[robot], wave, t, config.num_ticks))
                .collect();
            rescale_to_percent(&raw)
        })
        .collect();

    TimeSeriesTable {
        values,
        coefficients,
        waves,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matchgen::tree::gen_family_tree;
    use crate::rng::{stream_rng, Stream};

    fn setup(seed: u64, config: &MatchConfig) -> (FamilyTree, TimeSeriesTable) {
        let ids: Vec<u32> = (0..config.num_robots as u32).collect();
        let tree =
            gen_family_tree(&mut stream_rng(seed, Stream::Tree), &ids, config.group_size_range)
                .unwrap();
        let series = gen_time_series(&mut stream_rng(seed, Stream::Series), &tree, config);
        (tree, series)
    }

    #[test]
    fn zero_noise_siblings_are_identical() {
        let config = MatchConfig {
            sibling_noise_scale: 0.0,
            ..Default::default()
        };
        let (tree, series) = setup(4, &config);
        for robot in 0..100u32 {
            for sib in tree.siblings(robot) {
                assert_eq!(series.values[robot as usize], series.values[sib as usize]);
            }
        }
    }

    #[test]
    fn values_cover_every_cell_within_range() {
        for variant in [false, true] {
            let config = MatchConfig {
                nonpolynomial_series: variant,
                ..Default::default()
            };
            let (_, series) = setup(8, &config);
            assert_eq!(series.num_robots(), 100);
            for row in &series.values {
                assert_eq!(row.len(), 100);
                assert!(row.iter().all(|&v| v <= 100));
                // Per-robot rescaling spans the full range.
                assert_eq!(row.iter().min(), Some(&0));
                assert_eq!(row.iter().max(), Some(&100));
            }
            assert_eq!(series.waves.is_some(), variant);
        }
    }

    #[test]
    fn raw_polynomial_evaluation() {
        // 1 + 2x + 3x^2 at the endpoints and midpoint of 0..=100.
        let c = [1.0, 2.0, 3.0];
        assert_eq!(raw_value(&c, None, 0, 101), 2.0);
        assert_eq!(raw_value(&c, None, 50, 101), 1.0);
        assert_eq!(raw_value(&c, None, 100, 101), 6.0);
    }

    #[test]
    fn flat_curve_rescales_to_midpoint() {
        assert_eq!(rescale_to_percent(&[3.0, 3.0, 3.0]), vec![50, 50, 50]);
        assert_eq!(rescale_to_percent(&[0.0, 0.5, 1.0]), vec![0, 50, 100]);
    }
}
