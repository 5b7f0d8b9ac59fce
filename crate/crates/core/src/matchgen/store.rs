//! Match directories: one JSON document per table plus a manifest.
//!
//! ```text
//! manifest.json  config echo + content hash
//! robots.json    ids, names, expirations, parts, productivity
//! series.json    values[robot][tick] and hidden coefficients
//! network.json   edge list
//! tree.json      parent -> children
//! model.json     productivity model
//! ```

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::MatchConfig;
use crate::error::StoreError;
use crate::matchgen::{FamilyTree, MatchData, ProductivityModel, RobotRecord, SocialNetwork, TimeSeriesTable};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const ROBOTS_FILE: &str = "robots.json";
pub const SERIES_FILE: &str = "series.json";
pub const NETWORK_FILE: &str = "network.json";
pub const TREE_FILE: &str = "tree.json";
pub const MODEL_FILE: &str = "model.json";

const FORMAT: &str = "roboviz-match/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub config: MatchConfig,
    pub content_hash: String,
    pub files: Vec<String>,
}

fn write_json<T: Serialize>(dir: &Path, file: &str, value: &T) -> Result<(), StoreError> {
    let path = dir.join(file);
    // Round-tripping through `Value` sorts object keys.
    let value = serde_json::to_value(value).expect("match tables serialize");
    let mut text = serde_json::to_string_pretty(&value).expect("JSON values serialize");
    text.push('\n');
    fs::write(&path, text).map_err(|source| StoreError::Io { path, source })
}

fn read_json<T: DeserializeOwned>(dir: &Path, file: &str) -> Result<T, StoreError> {
    let path = dir.join(file);
    let text = fs::read_to_string(&path).map_err(|source| StoreError::Io { path, source })?;
    serde_json::from_str(&text).map_err(|source| StoreError::Parse {
        file: file.to_string(),
        source,
    })
}

/// Writes all match files into `dir` (created if missing) and returns the
/// content hash recorded in the manifest.
pub fn save_match(data: &MatchData, dir: &Path) -> Result<String, StoreError> {
    fs::create_dir_all(dir).map_err(|source| StoreError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    write_json(dir, ROBOTS_FILE, &data.robots)?;
    write_json(dir, SERIES_FILE, &data.series)?;
    write_json(dir, NETWORK_FILE, &data.network)?;
    write_json(dir, TREE_FILE, &data.tree)?;
    write_json(dir, MODEL_FILE, &data.model)?;
    let hash = data.content_hash();
    let manifest = Manifest {
        format: FORMAT.to_string(),
        config: data.config.clone(),
        content_hash: hash.clone(),
        files: [ROBOTS_FILE, SERIES_FILE, NETWORK_FILE, TREE_FILE, MODEL_FILE]
            .map(String::from)
            .to_vec(),
    };
    write_json(dir, MANIFEST_FILE, &manifest)?;
    Ok(hash)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, StoreError> {
    read_json(dir, MANIFEST_FILE)
}

/// Loads a match directory, verifying the content hash and the cross-table
/// invariants.
pub fn load_match(dir: &Path) -> Result<MatchData, StoreError> {
    let manifest = read_manifest(dir)?;
    let data = MatchData {
        config: manifest.config.clone(),
        robots: read_json::<Vec<RobotRecord>>(dir, ROBOTS_FILE)?,
        series: read_json::<TimeSeriesTable>(dir, SERIES_FILE)?,
        network: read_json::<SocialNetwork>(dir, NETWORK_FILE)?,
        tree: read_json::<FamilyTree>(dir, TREE_FILE)?,
        model: read_json::<ProductivityModel>(dir, MODEL_FILE)?,
    };
    let actual = data.content_hash();
    if actual != manifest.content_hash {
        return Err(StoreError::Integrity {
            expected: manifest.content_hash,
            actual,
        });
    }
    check_consistency(&data)?;
    Ok(data)
}

fn inconsistent(file: &str, reason: impl Into<String>) -> StoreError {
    StoreError::Inconsistent {
        file: file.to_string(),
        reason: reason.into(),
    }
}

fn check_consistency(data: &MatchData) -> Result<(), StoreError> {
    let config = &data.config;
    config
        .validate()
        .map_err(|e| inconsistent(MANIFEST_FILE, e.to_string()))?;
    let n = config.num_robots;
    let [lo, hi] = config.expiration_window;

    if data.robots.len() != n {
        return Err(inconsistent(ROBOTS_FILE, format!("expected {n} robots")));
    }
    for (i, r) in data.robots.iter().enumerate() {
        if r.id as usize != i {
            return Err(inconsistent(ROBOTS_FILE, format!("robot at index {i} has id {}", r.id)));
        }
        if !(lo..=hi).contains(&r.expiration_tick) {
            return Err(inconsistent(ROBOTS_FILE, format!("robot {i} expires outside the window")));
        }
        if !r.parts.in_declared_ranges() {
            return Err(inconsistent(ROBOTS_FILE, format!("robot {i} has out-of-range parts")));
        }
        if data.model.productivity(&r.parts) != r.productivity {
            return Err(inconsistent(
                MODEL_FILE,
                format!("model does not reproduce productivity of robot {i}"),
            ));
        }
    }
    if data.series.num_robots() != n
        || data.series.values.iter().any(|row| row.len() != config.num_ticks as usize)
    {
        return Err(inconsistent(SERIES_FILE, "table shape does not match the config"));
    }
    if data.series.values.iter().flatten().any(|&v| v > 100) {
        return Err(inconsistent(SERIES_FILE, "values must lie in 0..=100"));
    }
    if data.network.num_nodes() != n {
        return Err(inconsistent(NETWORK_FILE, "node count does not match the robot count"));
    }
    if data.tree.num_robots() != n {
        return Err(inconsistent(TREE_FILE, "leaf count does not match the robot count"));
    }
    Ok(())
}
