//! Deterministic generation of everything a match needs.

pub mod expiration;
pub mod names;
pub mod network;
pub mod parts;
pub mod series;
pub mod store;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::canonical::{sha256_hex, to_canonical_json};
use crate::config::MatchConfig;
use crate::error::GenError;
use crate::rng::{stream_rng, Stream};

pub use expiration::assign_expirations;
pub use network::{gen_social_network, SocialNetwork};
pub use parts::{gen_parts_productivity, Label, PartValue, PartVector, ProductivityModel, PARTS};
pub use series::{gen_time_series, TimeSeriesTable};
pub use store::{load_match, save_match};
pub use tree::{gen_family_tree, FamilyTree};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotRecord {
    pub id: u32,
    pub name: String,
    pub expiration_tick: u32,
    pub parts: PartVector,
    pub productivity: f64,
}

/// The complete pre-generated truth for one match.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchData {
    pub config: MatchConfig,
    pub robots: Vec<RobotRecord>,
    pub series: TimeSeriesTable,
    pub network: SocialNetwork,
    pub tree: FamilyTree,
    pub model: ProductivityModel,
}

impl MatchData {
    pub fn num_robots(&self) -> usize {
        self.robots.len()
    }

    pub fn robot(&self, id: u32) -> Option<&RobotRecord> {
        self.robots.get(id as usize)
    }

    /// The value teams are trying to guess: the series at expiration.
    pub fn truth(&self, id: u32) -> u8 {
        self.series
            .value(id, self.robots[id as usize].expiration_tick)
    }

    /// SHA-256 over the canonical JSON of config, robots, series, network,
    /// tree and model, concatenated in that order.
    pub fn content_hash(&self) -> String {
        let mut buf = String::new();
        buf.push_str(&to_canonical_json(&self.config));
        buf.push_str(&to_canonical_json(&self.robots));
        buf.push_str(&to_canonical_json(&self.series));
        buf.push_str(&to_canonical_json(&self.network));
        buf.push_str(&to_canonical_json(&self.tree));
        buf.push_str(&to_canonical_json(&self.model));
        sha256_hex(buf.as_bytes())
    }
}

/// Generates a full match. Each component draws from its own seeded stream,
/// so the result depends only on `config`.
pub fn generate_match(config: &MatchConfig) -> Result<MatchData, GenError> {
    config.validate()?;
    let n = config.num_robots;
    let ids: Vec<u32> = (0..n as u32).collect();

    let names = names::gen_names(&mut stream_rng(config.seed, Stream::Names), n);
    let tree = gen_family_tree(
        &mut stream_rng(config.seed, Stream::Tree),
        &ids,
        config.group_size_range,
    )?;
    let series = gen_time_series(&mut stream_rng(config.seed, Stream::Series), &tree, config);
    let network = gen_social_network(
        &mut stream_rng(config.seed, Stream::Network),
        n,
        config.network_edges_per_node,
        config.network_triad_probability,
    )?;
    let (parts, model) = gen_parts_productivity(&mut stream_rng(config.seed, Stream::Parts), n)?;
    let productivity: Vec<f64> = parts.iter().map(|p| model.productivity(p)).collect();
    let expirations = assign_expirations(
        &mut stream_rng(config.seed, Stream::Expirations),
        config,
        &productivity,
    )?;

    let robots = ids
        .iter()
        .zip(names)
        .zip(parts)
        .map(|((&id, name), parts)| RobotRecord {
            id,
            name,
            expiration_tick: expirations[id as usize],
            productivity: productivity[id as usize],
            parts,
        })
        .collect();

    Ok(MatchData {
        config: config.clone(),
        robots,
        series,
        network,
        tree,
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_config_same_match() {
        let a = generate_match(&MatchConfig::with_seed(7)).unwrap();
        let b = generate_match(&MatchConfig::with_seed(7)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.content_hash(), b.content_hash());
        let c = generate_match(&MatchConfig::with_seed(8)).unwrap();
        assert_ne!(a.content_hash(), c.content_hash());
    }

    #[test]
    fn default_match_shape() {
        let m = generate_match(&MatchConfig::with_seed(7)).unwrap();
        assert_eq!(m.num_robots(), 100);
        let ids: Vec<u32> = m.robots.iter().map(|r| r.id).collect();
        assert_eq!(ids, (0..100).collect::<Vec<_>>());
        let mean = m.robots.iter().map(|r| r.productivity).sum::<f64>() / 100.0;
        assert!(mean > 0.0);
        for r in &m.robots {
            assert_eq!(m.model.productivity(&r.parts), r.productivity);
            assert!((10..=99).contains(&r.expiration_tick));
        }
    }

    #[test]
    fn invalid_config_is_reported() {
        let config = MatchConfig {
            bias_probability: -0.1,
            ..MatchConfig::default()
        };
        match generate_match(&config) {
            Err(GenError::Config(e)) => assert_eq!(e.field, "bias_probability"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
