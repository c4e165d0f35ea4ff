//! Incident-subgraph edge sampling: every edge of a parent graph is kept
//! independently with probability `p`, and a node survives exactly when at
//! least one of its edges does.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// An edge-sampled graph together with its provenance: the retention
/// probability, the per-node and per-edge mapping back to the parent, and
/// the number of parent nodes that lost every edge. Immutable and shareable.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGraph {
    graph: Graph,
    p: f64,
    parent_nodes: Vec<usize>,
    parent_edges: Vec<usize>,
    removed_nodes: usize,
}

impl SampledGraph {
    /// The sampled graph itself (isolated parent nodes removed).
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Edge retention probability.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Number of parent nodes with no retained edge.
    pub fn removed_nodes(&self) -> usize {
        self.removed_nodes
    }

    /// Parent node index behind sampled node `i`.
    pub fn parent_node(&self, i: usize) -> usize {
        self.parent_nodes[i]
    }

    /// Parent edge index behind sampled edge `e`.
    pub fn parent_edge(&self, e: usize) -> usize {
        self.parent_edges[e]
    }

    pub fn parent_nodes(&self) -> &[usize] {
        &self.parent_nodes
    }

    pub fn parent_edges(&self) -> &[usize] {
        &self.parent_edges
    }

    /// Wraps an observed graph (e.g. one read from disk) as its own sample,
    /// with identity provenance and no removed-node information. Estimators
    /// only need the observed graph and `p`, so this is how standalone files
    /// enter the estimation pipeline.
    pub fn from_observed(graph: Graph, p: f64) -> Result<SampledGraph> {
        check_probability(p)?;
        let parent_nodes = (0..graph.node_count()).collect();
        let parent_edges = (0..graph.edge_count()).collect();
        Ok(SampledGraph {
            graph,
            p,
            parent_nodes,
            parent_edges,
            removed_nodes: 0,
        })
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidProbability { value: p });
    }
    Ok(())
}

/// Draws one Bernoulli(`p`) sample per parent edge, in canonical edge order,
/// and assembles the incident subgraph. The draw order is fixed, so a given
/// `(parent, p, seed)` always yields the same sample.
pub fn edge_sample(parent: &Graph, p: f64, seed: u64) -> Result<SampledGraph> {
    check_probability(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kept_edges = Vec::new();
    for (e, &pair) in parent.edges().iter().enumerate() {
        if rng.gen::<f64>() < p {
            kept_edges.push((e, pair));
        }
    }

    let mut node_map = vec![usize::MAX; parent.node_count()];
    let mut parent_nodes = Vec::new();
    for &(_, (a, b)) in &kept_edges {
        for v in [a, b] {
            if node_map[v] == usize::MAX {
                node_map[v] = 0; // provisional; renumbered below
                parent_nodes.push(v);
            }
        }
    }
    parent_nodes.sort_unstable();
    for (new_id, &v) in parent_nodes.iter().enumerate() {
        node_map[v] = new_id;
    }

    let labels = parent_nodes
        .iter()
        .map(|&v| parent.label(v).to_string())
        .collect();
    let edges = kept_edges
        .iter()
        .map(|&(_, (a, b))| (node_map[a], node_map[b]))
        .collect();
    let graph = Graph::assemble(labels, edges);
    let parent_edges: Vec<usize> = kept_edges.iter().map(|&(e, _)| e).collect();
    debug_assert_eq!(graph.edge_count(), parent_edges.len());

    let removed_nodes = parent.node_count() - parent_nodes.len();
    Ok(SampledGraph {
        graph,
        p,
        parent_nodes,
        parent_edges,
        removed_nodes,
    })
}

/// Deterministic stream seed derived from a master seed, a context label and
/// two numeric coordinates (typically the grid probability and a replicate
/// index). FNV-1a over the label, then a splitmix64-style finalizer.
pub fn derive_seed(master: u64, label: &str, p: f64, index: u64) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for byte in label.bytes() {
        h ^= byte as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    let mut mix = |v: u64| {
        h ^= v;
        h = h.wrapping_mul(0x100000001b3);
        let mut z = h.wrapping_add(0x9e3779b97f4a7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        h = z ^ (z >> 31);
    };
    mix(master);
    mix(p.to_bits());
    mix(index);
    h
}
