//! Family tree: robots are leaves, synthetic ancestors are internal nodes.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::GenError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "TreeFile", try_from = "TreeFile")]
pub struct FamilyTree {
    num_robots: usize,
    root: u32,
    children: BTreeMap<u32, Vec<u32>>,
    parent: BTreeMap<u32, u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TreeFile {
    num_robots: usize,
    root: u32,
    children: BTreeMap<u32, Vec<u32>>,
}

impl From<FamilyTree> for TreeFile {
    fn from(tree: FamilyTree) -> Self {
        Self {
            num_robots: tree.num_robots,
            root: tree.root,
            children: tree.children,
        }
    }
}

impl TryFrom<TreeFile> for FamilyTree {
    type Error = String;

    fn try_from(file: TreeFile) -> Result<Self, String> {
        FamilyTree::new(file.num_robots, file.root, file.children)
    }
}

impl FamilyTree {
    /// Builds a tree and checks its structural invariants: one root, every
    /// robot id exactly once as a leaf, internal ids disjoint from robot ids.
    pub fn new(
        num_robots: usize,
        root: u32,
        children: BTreeMap<u32, Vec<u32>>,
    ) -> Result<Self, String> {
        let mut parent = BTreeMap::new();
        for (&node, kids) in &children {
            if (node as usize) < num_robots {
                return Err(format!("robot {node} appears as an internal node"));
            }
            if kids.is_empty() {
                return Err(format!("internal node {node} has no children"));
            }
            for &kid in kids {
                if parent.insert(kid, node).is_some() {
                    return Err(format!("node {kid} has more than one parent"));
                }
            }
        }
        if parent.contains_key(&root) {
            return Err(format!("root {root} has a parent"));
        }
        if !children.contains_key(&root) && num_robots > 1 {
            return Err(format!("root {root} is not an internal node"));
        }
        for robot in 0..num_robots as u32 {
            if !parent.contains_key(&robot) && !(num_robots == 1 && robot == root) {
                return Err(format!("robot {robot} is missing from the tree"));
            }
        }
        for &node in parent.keys() {
            if node as usize >= num_robots && !children.contains_key(&node) {
                return Err(format!("node {node} is neither a robot nor an internal node"));
            }
        }
        let tree = Self {
            num_robots,
            root,
            children,
            parent,
        };
        // Every node must reach the root; this also rules out cycles.
        for &node in tree.parent.keys() {
            let mut cursor = node;
            let mut steps = 0;
            while let Some(&up) = tree.parent.get(&cursor) {
                cursor = up;
                steps += 1;
                if steps > tree.parent.len() {
                    return Err(format!("cycle through node {node}"));
                }
            }
            if cursor != root {
                return Err(format!("node {node} is not connected to the root"));
            }
        }
        Ok(tree)
    }

    pub fn num_robots(&self) -> usize {
        self.num_robots
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn is_robot(&self, node: u32) -> bool {
        (node as usize) < self.num_robots
    }

    pub fn children(&self, node: u32) -> &[u32] {
        self.children.get(&node).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn parent(&self, node: u32) -> Option<u32> {
        self.parent.get(&node).copied()
    }

    /// Internal nodes in ascending id order (the root is the largest id).
    pub fn internal_nodes(&self) -> impl Iterator<Item = u32> + '_ {
        self.children.keys().copied()
    }

    pub fn internal_count(&self) -> usize {
        self.children.len()
    }

    /// Robots sharing this robot's parent, excluding the robot itself.
    pub fn siblings(&self, robot: u32) -> Vec<u32> {
        match self.parent(robot) {
            Some(p) => self
                .children(p)
                .iter()
                .copied()
                .filter(|&n| n != robot && self.is_robot(n))
                .collect(),
            None => Vec::new(),
        }
    }

    /// Nodes ordered so that every parent precedes its children.
    pub fn top_down(&self) -> Vec<u32> {
        let mut order = vec![self.root];
        let mut i = 0;
        while i < order.len() {
            order.extend_from_slice(self.children(order[i]));
            i += 1;
        }
        order
    }
}

/// Repeatedly shuffles the frontier and cuts it into groups whose sizes are
/// drawn uniformly from `group_size_range`; each group is replaced by a new
/// parent node until a single ancestor remains. A leftover single node joins
/// the last group, so a parent can have up to `max + 1` children.
pub fn gen_family_tree<R: RngCore>(
    rng: &mut R,
    robot_ids: &[u32],
    group_size_range: [usize; 2],
) -> Result<FamilyTree, GenError> {
    if robot_ids.len() < 2 {
        return Err(GenError::TooFewRobots(robot_ids.len()));
    }
    let [g_min, g_max] = group_size_range;
    let num_robots = robot_ids.len();
    let mut next_id = robot_ids.iter().copied().max().unwrap_or(0) + 1;
    let mut children: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    let mut frontier: Vec<u32> = robot_ids.to_vec();

    while frontier.len() > 1 {
        frontier.shuffle(rng);
        let mut parents = Vec::new();
        let mut start = 0;
        while start < frontier.len() {
            let remaining = frontier.len() - start;
            let mut size = rng.random_range(g_min..=g_max).min(remaining);
            if remaining - size == 1 {
                size += 1;
            }
            let mut group = frontier[start..start + size].to_vec();
            group.sort_unstable();
            children.insert(next_id, group);
            parents.push(next_id);
            next_id += 1;
            start += size;
        }
        frontier = parents;
    }

    FamilyTree::new(num_robots, frontier[0], children)
        .map_err(|e| unreachable!("grouping produced an invalid tree: {e}"))
}
