//! Bethe-lattice FSNs: generation, shell populations, distances, the
//! (C, E, R) embedding of FD tags, tag placement and ontology matching.

mod bethe;
mod embed;
mod io;

pub use bethe::{build_bethe, build_bethe_bounded, shell_count, total_nodes, DEFAULT_NODE_BOUND};
pub use embed::{embed, ontology_match, uri_coordinate, Signature};
pub use io::{from_json, to_json};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{FdTag, IngestError};

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("invalid lattice spec: {0}")]
    InvalidSpec(String),
    #[error("lattice would have {projected} nodes, above the bound of {bound}")]
    TooLarge { projected: u128, bound: usize },
    #[error("shell count domain error: {0}")]
    Domain(String),
    #[error("unknown node id {0}")]
    UnknownNode(usize),
    #[error("{tags} tags do not fit on {nodes} nodes")]
    TooManyTags { tags: usize, nodes: usize },
    #[error("tag {0} cannot be resolved in the formal context")]
    UnknownTag(String),
    #[error(transparent)]
    Context(#[from] IngestError),
    #[error("lattice json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed lattice: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetheLatticeSpec {
    /// Coordination number.
    pub z: usize,
    /// Deepest generation.
    pub k_max: usize,
    pub seed: u64,
}

impl BetheLatticeSpec {
    pub fn new(z: usize, k_max: usize, seed: u64) -> Self {
        Self { z, k_max, seed }
    }

    pub fn validate(&self) -> Result<(), LatticeError> {
        if self.z < 2 {
            return Err(LatticeError::InvalidSpec(format!(
                "coordination number z must be >= 2, got {}",
                self.z
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: usize,
    pub generation: usize,
    pub tag: Option<usize>,
    /// Position used for gradient recovery and rewiring distances.
    pub coords: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub stiffness: f64,
    pub intact: bool,
}

impl Bond {
    pub fn other(&self, node: usize) -> usize {
        if self.a == node {
            self.b
        } else {
            self.a
        }
    }

    pub fn joins(&self, x: usize, y: usize) -> bool {
        (self.a == x && self.b == y) || (self.a == y && self.b == x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FsnLattice {
    pub spec: BetheLatticeSpec,
    pub nodes: Vec<Node>,
    pub bonds: Vec<Bond>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    /// `sqrt(|k_a - k_b|)`.
    #[default]
    SqrtGeneration,
    /// `|k_a - k_b|`.
    Generation,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignStrategy {
    /// Tag `i` goes to node `i` (generation order).
    #[default]
    Bfs,
    /// Nodes permuted with the lattice seed.
    Random,
}

impl FsnLattice {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: usize) -> Result<&Node, LatticeError> {
        self.nodes.get(id).ok_or(LatticeError::UnknownNode(id))
    }

    /// Bond count the node had when the lattice was generated.
    pub fn nominal_degree(&self, id: usize) -> usize {
        let gen = self.nodes[id].generation;
        if self.spec.k_max == 0 {
            0
        } else if gen < self.spec.k_max {
            self.spec.z
        } else {
            1
        }
    }

    /// Outermost shell; these nodes carry the prescribed displacements.
    pub fn is_boundary(&self, id: usize) -> bool {
        self.nodes[id].generation == self.spec.k_max
    }

    /// Intact `(neighbor, bond index)` lists per node.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (i, b) in self.bonds.iter().enumerate().filter(|(_, b)| b.intact) {
            adj[b.a].push((b.b, i));
            adj[b.b].push((b.a, i));
        }
        adj
    }

    pub fn intact_bonds(&self) -> usize {
        self.bonds.iter().filter(|b| b.intact).count()
    }

    pub fn shell_population(&self, k: usize) -> usize {
        self.nodes.iter().filter(|n| n.generation == k).count()
    }

    pub fn generation_distance(&self, a: usize, b: usize, kind: DistanceKind) -> Result<f64, LatticeError> {
        let ka = self.node(a)?.generation as f64;
        let kb = self.node(b)?.generation as f64;
        let diff = (ka - kb).abs();
        Ok(match kind {
            DistanceKind::SqrtGeneration => diff.sqrt(),
            DistanceKind::Generation => diff,
        })
    }

    /// Places tags on nodes, one tag per node.
    pub fn assign_tags(&self, tags: &[FdTag], strategy: AssignStrategy) -> Result<FsnLattice, LatticeError> {
        if tags.len() > self.nodes.len() {
            return Err(LatticeError::TooManyTags {
                tags: tags.len(),
                nodes: self.nodes.len(),
            });
        }
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        if strategy == AssignStrategy::Random {
            let mut rng = ChaCha8Rng::seed_from_u64(self.spec.seed ^ 0x7a67_5f61_7373_6967);
            order.shuffle(&mut rng);
        }
        let mut out = self.clone();
        for n in &mut out.nodes {
            n.tag = None;
        }
        for (tag, &node) in tags.iter().zip(&order) {
            out.nodes[node].tag = Some(tag.id);
        }
        Ok(out)
    }
}

pub fn generation_distance(lattice: &FsnLattice, a: usize, b: usize) -> Result<f64, LatticeError> {
    lattice.generation_distance(a, b, DistanceKind::default())
}

pub fn assign_tags(lattice: &FsnLattice, tags: &[FdTag], strategy: AssignStrategy) -> Result<FsnLattice, LatticeError> {
    lattice.assign_tags(tags, strategy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tag(id: usize) -> FdTag {
        FdTag {
            id,
            label: format!("t{id}"),
            context_ref: "u".into(),
            exposition: 0.5,
            resource: "u".into(),
            embedding: [0.0; 3],
        }
    }

    #[test]
    fn distance_examples() {
        let l = build_bethe(&BetheLatticeSpec::new(2, 5, 0)).unwrap();
        let by_gen = |k: usize| l.nodes.iter().find(|n| n.generation == k).unwrap().id;
        assert_eq!(generation_distance(&l, by_gen(3), by_gen(3)).unwrap(), 0.0);
        assert_eq!(generation_distance(&l, by_gen(1), by_gen(5)).unwrap(), 2.0);
        assert!((generation_distance(&l, by_gen(0), by_gen(2)).unwrap() - 1.41421356).abs() < 1e-8);
        assert_eq!(l.generation_distance(by_gen(0), by_gen(2), DistanceKind::Generation).unwrap(), 2.0);
        assert!(matches!(generation_distance(&l, 0, 999), Err(LatticeError::UnknownNode(999))));
    }

    #[test]
    fn bfs_assignment() {
        let l = build_bethe(&BetheLatticeSpec::new(3, 1, 0)).unwrap();
        let tags: Vec<FdTag> = (0..4).map(tag).collect();
        let out = l.assign_tags(&tags, AssignStrategy::Bfs).unwrap();
        assert_eq!(out.nodes[0].tag, Some(0));
        assert_eq!(out.nodes.iter().filter(|n| n.generation == 1).map(|n| n.tag.unwrap()).collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn empty_assignment_leaves_lattice_unchanged() {
        let l = build_bethe(&BetheLatticeSpec::new(3, 2, 0)).unwrap();
        assert_eq!(l.assign_tags(&[], AssignStrategy::Random).unwrap(), l);
    }

    #[test]
    fn random_assignment_is_seeded() {
        let l = build_bethe(&BetheLatticeSpec::new(3, 3, 11)).unwrap();
        let tags: Vec<FdTag> = (0..10).map(tag).collect();
        let a = l.assign_tags(&tags, AssignStrategy::Random).unwrap();
        let b = l.assign_tags(&tags, AssignStrategy::Random).unwrap();
        assert_eq!(a, b);
        let mut placed: Vec<usize> = a.nodes.iter().filter_map(|n| n.tag).collect();
        placed.sort();
        assert_eq!(placed, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn too_many_tags() {
        let l = build_bethe(&BetheLatticeSpec::new(3, 0, 0)).unwrap();
        let tags: Vec<FdTag> = (0..2).map(tag).collect();
        assert!(matches!(l.assign_tags(&tags, AssignStrategy::Bfs), Err(LatticeError::TooManyTags { .. })));
    }

    proptest! {
        #[test]
        fn generation_distance_pseudometric(z in 2usize..5, k in 1usize..5, a in any::<usize>(), b in any::<usize>(), c in any::<usize>()) {
            let l = build_bethe(&BetheLatticeSpec::new(z, k, 0)).unwrap();
            let (a, b, c) = (a % l.len(), b % l.len(), c % l.len());
            let d = |x, y| generation_distance(&l, x, y).unwrap();
            prop_assert_eq!(d(a, a), 0.0);
            prop_assert_eq!(d(a, b), d(b, a));
            prop_assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-12);
        }
    }
}
