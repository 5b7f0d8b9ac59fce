//! Match configuration and its validation rules.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// How robot expiration ticks relate to robot productivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpirationBias {
    /// Independent uniform draws over the expiration window.
    #[default]
    None,
    /// High-productivity robots tend to expire early.
    EarlyProductive,
    /// High-productivity robots tend to expire late.
    LateProductive,
}

/// Everything needed to regenerate a match bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchConfig {
    pub seed: u64,
    pub num_robots: usize,
    pub num_ticks: u32,
    pub tick_seconds: f64,
    /// A guess within this distance of the truth counts as "close".
    pub proximity_threshold: u32,
    pub poly_degree: usize,
    pub drops_per_tick_series: usize,
    pub drops_per_tick_parts: usize,
    pub bias_probability: f64,
    pub network_edges_per_node: usize,
    pub network_triad_probability: f64,
    pub group_size_range: [usize; 2],
    pub expiration_window: [u32; 2],
    pub nonpolynomial_series: bool,
    pub expiration_bias: ExpirationBias,
    pub sibling_noise_scale: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            num_robots: 100,
            num_ticks: 100,
            tick_seconds: 6.0,
            proximity_threshold: 10,
            poly_degree: 4,
            drops_per_tick_series: 5,
            drops_per_tick_parts: 5,
            bias_probability: 0.8,
            network_edges_per_node: 2,
            network_triad_probability: 0.1,
            group_size_range: [2, 4],
            expiration_window: [10, 99],
            nonpolynomial_series: false,
            expiration_bias: ExpirationBias::None,
            sibling_noise_scale: 0.1,
        }
    }
}

impl MatchConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    /// Applies a named variant: `standard`, `nonpoly`, `early`, `late`, or a
    /// `+`-joined combination such as `nonpoly+late`.
    pub fn apply_variant(mut self, variant: &str) -> Result<Self, ConfigError> {
        for part in variant.split('+').map(str::trim) {
            match part {
                "" | "standard" => {}
                "nonpoly" | "nonpolynomial" => self.nonpolynomial_series = true,
                "early" | "early_productive" => {
                    self.expiration_bias = ExpirationBias::EarlyProductive
                }
                "late" | "late_productive" => self.expiration_bias = ExpirationBias::LateProductive,
                other => {
                    return Err(ConfigError::new(
                        "variant",
                        format!("unknown variant `{other}`"),
                    ))
                }
            }
        }
        Ok(self)
    }

    /// Items delivered to one team on every tick.
    pub fn drops_per_tick(&self) -> usize {
        self.drops_per_tick_series + self.drops_per_tick_parts
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let [win_min, win_max] = self.expiration_window;
        if self.num_robots < 2 {
            return Err(ConfigError::new("num_robots", "at least 2 robots are required"));
        }
        if self.num_ticks < 2 {
            return Err(ConfigError::new("num_ticks", "at least 2 ticks are required"));
        }
        if !(self.tick_seconds.is_finite() && self.tick_seconds > 0.0) {
            return Err(ConfigError::new("tick_seconds", "must be a positive duration"));
        }
        if win_min < 1 {
            return Err(ConfigError::new("expiration_window", "minimum tick must be at least 1"));
        }
        if win_max <= win_min {
            return Err(ConfigError::new(
                "expiration_window",
                "window must span more than one tick (max > min)",
            ));
        }
        // The truth is read from the series at the expiration tick, and the
        // series only covers ticks 0..num_ticks-1.
        if win_max >= self.num_ticks {
            return Err(ConfigError::new(
                "expiration_window",
                format!("maximum tick {win_max} must be below num_ticks {}", self.num_ticks),
            ));
        }
        if self.poly_degree < 1 {
            return Err(ConfigError::new("poly_degree", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.bias_probability) {
            return Err(ConfigError::new("bias_probability", "must lie in [0, 1]"));
        }
        if self.network_edges_per_node < 1 {
            return Err(ConfigError::new("network_edges_per_node", "must be at least 1"));
        }
        if self.num_robots <= self.network_edges_per_node {
            return Err(ConfigError::new(
                "network_edges_per_node",
                "must be smaller than num_robots",
            ));
        }
        if !(0.0..=1.0).contains(&self.network_triad_probability) {
            return Err(ConfigError::new("network_triad_probability", "must lie in [0, 1]"));
        }
        let [g_min, g_max] = self.group_size_range;
        if g_min < 2 || g_max < g_min {
            return Err(ConfigError::new(
                "group_size_range",
                "requires 2 <= min <= max",
            ));
        }
        if !(self.sibling_noise_scale.is_finite() && self.sibling_noise_scale >= 0.0) {
            return Err(ConfigError::new("sibling_noise_scale", "must be a non-negative real"));
        }
        Ok(())
    }
}
