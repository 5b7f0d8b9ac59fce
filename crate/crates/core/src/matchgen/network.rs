//! Powerlaw friendship network grown by preferential attachment with triad
//! formation (Holme–Kim growth).

use std::collections::VecDeque;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::GenError;

/// Undirected simple graph on robot ids `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "NetworkFile", try_from = "NetworkFile")]
pub struct SocialNetwork {
    adjacency: Vec<Vec<u32>>,
}

/// On-disk form: node count plus an edge list with `a < b`, sorted.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct NetworkFile {
    num_nodes: usize,
    edges: Vec<[u32; 2]>,
}

impl From<SocialNetwork> for NetworkFile {
    fn from(net: SocialNetwork) -> Self {
        Self {
            num_nodes: net.num_nodes(),
            edges: net.edges().collect(),
        }
    }
}

impl TryFrom<NetworkFile> for SocialNetwork {
    type Error = String;

    fn try_from(file: NetworkFile) -> Result<Self, String> {
        SocialNetwork::from_edges(file.num_nodes, &file.edges)
    }
}

impl SocialNetwork {
    /// Builds a graph, rejecting self-loops, duplicate edges and unknown ids.
    pub fn from_edges(num_nodes: usize, edges: &[[u32; 2]]) -> Result<Self, String> {
        let mut adjacency = vec![Vec::new(); num_nodes];
        for &[a, b] in edges {
            if a as usize >= num_nodes || b as usize >= num_nodes {
                return Err(format!("edge ({a}, {b}) references a node outside 0..{num_nodes}"));
            }
            if a == b {
                return Err(format!("self-loop on node {a}"));
            }
            if adjacency[a as usize].contains(&b) {
                return Err(format!("duplicate edge ({a}, {b})"));
            }
            adjacency[a as usize].push(b);
            adjacency[b as usize].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self { adjacency })
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn degree(&self, node: u32) -> usize {
        self.adjacency[node as usize].len()
    }

    /// Sorted neighbor ids.
    pub fn neighbors(&self, node: u32) -> &[u32] {
        &self.adjacency[node as usize]
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.adjacency[a as usize].binary_search(&b).is_ok()
    }

    /// Each edge once, as `[low, high]`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = [u32; 2]> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(a, list)| {
            let a = a as u32;
            list.iter().filter(move |&&b| a < b).map(move |&b| [a, b])
        })
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_connected(&self) -> bool {
        let n = self.num_nodes();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0u32]);
        seen[0] = true;
        let mut visited = 1;
        while let Some(node) = queue.pop_front() {
            for &next in self.neighbors(node) {
                if !seen[next as usize] {
                    seen[next as usize] = true;
                    visited += 1;
                    queue.push_back(next);
                }
            }
        }
        visited == n
    }
}

/// Grows an `n`-node graph where every node after the first `m` attaches with
/// exactly `m` new edges. The first edge of a new node goes to a
/// degree-proportional target; each further edge closes a triangle through
/// that target's neighbors with probability `p`, otherwise it is another
/// preferential pick.
pub fn gen_social_network<R: RngCore>(
    rng: &mut R,
    n: usize,
    m: usize,
    p: f64,
) -> Result<SocialNetwork, GenError> {
    if m < 1 || n <= m {
        return Err(GenError::NetworkTooSmall { n, m });
    }
    let p = p.clamp(0.0, 1.0);
    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); n];
    // Each node appears once per incident edge end (plus once for the seed
    // nodes), so a uniform pick from this list is degree-proportional.
    let mut repeated: Vec<u32> = (0..m as u32).collect();

    for source in m as u32..n as u32 {
        let mut targets: Vec<u32> = Vec::with_capacity(m);
        let mut anchor = preferential_pick(rng, &repeated, &targets);
        targets.push(anchor);
        while targets.len() < m {
            if rng.random_bool(p) {
                let closing: Vec<u32> = adjacency[anchor as usize]
                    .iter()
                    .copied()
                    .filter(|nbr| !targets.contains(nbr))
                    .collect();
                if !closing.is_empty() {
                    targets.push(closing[rng.random_range(0..closing.len())]);
                    continue;
                }
            }
            anchor = preferential_pick(rng, &repeated, &targets);
            targets.push(anchor);
        }
        for &t in &targets {
            adjacency[source as usize].push(t);
            adjacency[t as usize].push(source);
            repeated.push(t);
        }
        repeated.extend(std::iter::repeat_n(source, m));
    }

    for list in &mut adjacency {
        list.sort_unstable();
    }
    Ok(SocialNetwork { adjacency })
}

fn preferential_pick<R: RngCore>(rng: &mut R, repeated: &[u32], exclude: &[u32]) -> u32 {
    loop {
        let candidate = repeated[rng.random_range(0..repeated.len())];
        if !exclude.contains(&candidate) {
            return candidate;
        }
    }
}
