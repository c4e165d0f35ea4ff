//! Closed-form first and second moments of what edge sampling removes and
//! keeps, together with two independent checks: an exact oracle that
//! enumerates every subset of edges, and Monte Carlo helpers.
//!
//! All formulas treat edges as kept independently with probability `p`; a
//! node is removed exactly when none of its incident edges survive, so a
//! parent node of degree zero is always removed.

use crate::error::{Error, Result};
use crate::graph::{edge_triangle_counts, Graph};
use crate::sampling::{derive_seed, edge_sample};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Largest edge count the subset-enumeration oracle accepts (2^20 subsets).
pub const ENUMERATION_MAX_EDGES: usize = 20;

const SUBSET_BLOCK: u64 = 4096;

fn assert_probability(p: f64) {
    assert!(
        (0.0..=1.0).contains(&p),
        "retention probability must lie in [0, 1], got {p}"
    );
}

/// Expected number of parent nodes left with no retained incident edge:
/// `sum_i (1 - p)^(k_i)` over every parent node.
pub fn expected_removed_nodes(g: &Graph, p: f64) -> f64 {
    assert_probability(p);
    let q = 1.0 - p;
    g.degrees().iter().map(|&k| q.powi(k as i32)).sum()
}

/// Variance of the removed-node count. Removal indicators of adjacent nodes
/// are positively correlated through the shared edge, which contributes the
/// pairwise term `2 p (1 - p)^(k_i + k_j - 1)` per edge.
pub fn variance_removed_nodes(g: &Graph, p: f64) -> f64 {
    assert_probability(p);
    let q = 1.0 - p;
    let degrees = g.degrees();
    let node_term: f64 = degrees
        .iter()
        .map(|&k| {
            let qk = q.powi(k as i32);
            qk - qk * qk
        })
        .sum();
    let edge_term: f64 = g
        .edges()
        .iter()
        .map(|&(i, j)| p * q.powi((degrees[i] + degrees[j] - 1) as i32))
        .sum();
    node_term + 2.0 * edge_term
}

/// Expected number of surviving triangles: each parent triangle keeps all
/// three of its edges with probability `p^3`.
pub fn expected_sampled_triangles(total_triangles: u64, p: f64) -> f64 {
    assert_probability(p);
    p.powi(3) * total_triangles as f64
}

/// Variance of one edge's sampled triangle count, not conditioned on the
/// edge itself surviving: the count is `Binomial(t, p^2)` with probability
/// `p` and zero otherwise.
pub fn variance_edge_triangles(t: u64, p: f64) -> f64 {
    assert_probability(p);
    let t = t as f64;
    let p2 = p * p;
    p.powi(3) * t * (1.0 - p2 + p2 * t - p * p2 * t)
}

/// Variance of the total surviving triangle count. Triangle survivals are
/// correlated only through shared edges, so beyond the per-triangle
/// Bernoulli terms the formula involves the per-edge counts: their sum of
/// squares and the number of triangle pairs with an edge in common.
pub fn variance_total_triangles(g: &Graph, p: f64) -> f64 {
    assert_probability(p);
    let counts = edge_triangle_counts(g);
    let t = counts.total() as f64;
    let sum_sq = counts.sum_squared();
    let shared = counts.shared_edge_pairs() as f64;
    let p2 = p * p;
    let p3 = p * p2;
    let p5 = p2 * p3;
    let p6 = p3 * p3;
    (3.0 * p3 * (1.0 - p2) * t
        + (p5 - p6) * sum_sq
        + 6.0 * t * (p3 - p6)
        + 16.0 * shared * (p5 - p6))
        / 9.0
}

/// Number of unordered pairs of distinct triangles sharing an edge:
/// `sum_l C(T_l, 2)` over edges.
pub fn shared_link_triangle_pairs(g: &Graph) -> u64 {
    edge_triangle_counts(g).shared_edge_pairs()
}

/// Random quantity of a sampled graph whose exact distribution the
/// enumeration oracle can integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampledQuantity {
    /// Parent nodes with no retained incident edge.
    RemovedNodes,
    /// Parent triangles whose three edges all survive.
    TotalTriangles,
    /// Surviving triangles on one parent edge (zero when the edge drops).
    EdgeTriangles(usize),
    /// Retained incident edges of one parent node.
    NodeDegree(usize),
}

impl SampledQuantity {
    pub fn label(self) -> String {
        match self {
            SampledQuantity::RemovedNodes => "removed_nodes".into(),
            SampledQuantity::TotalTriangles => "total_triangles".into(),
            SampledQuantity::EdgeTriangles(l) => format!("edge_triangles[{l}]"),
            SampledQuantity::NodeDegree(i) => format!("node_degree[{i}]"),
        }
    }
}

/// Mean and variance of one sampled quantity, with optional Monte Carlo
/// companion moments.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub quantity: String,
    pub mean: f64,
    pub variance: f64,
    pub empirical: Option<EmpiricalMoments>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalMoments {
    pub mean: f64,
    pub variance: f64,
    pub replicates: u64,
}

impl MomentReport {
    pub const CSV_HEADER: &'static str =
        "quantity,mean,variance,empirical_mean,empirical_variance,replicates";

    pub fn csv_row(&self) -> String {
        match self.empirical {
            Some(e) => format!(
                "{},{},{},{},{},{}",
                self.quantity, self.mean, self.variance, e.mean, e.variance, e.replicates
            ),
            None => format!("{},{},{},,,", self.quantity, self.mean, self.variance),
        }
    }
}

/// Quantity-specific lookup tables for one enumeration run.
enum QuantityTable {
    /// Incident-edge mask per node; value = nodes with empty intersection.
    Removed(Vec<u32>),
    /// Three-edge mask per triangle; value = masks fully contained.
    Triangles(Vec<u32>),
    /// Incident-edge mask of one node; value = popcount of intersection.
    Degree(u32),
}

struct SubsetTables {
    edges: usize,
    table: QuantityTable,
    pow_keep: Vec<f64>,
    pow_drop: Vec<f64>,
}

fn triangle_edge_masks(g: &Graph) -> Vec<u32> {
    let edge_index = |a: usize, b: usize| -> u32 {
        g.edges()
            .binary_search(&(a.min(b), a.max(b)))
            .expect("triangle side is an edge") as u32
    };
    let mut masks = Vec::new();
    for (e, &(i, j)) in g.edges().iter().enumerate() {
        // Each triangle i < j < k is recorded once, from its lowest edge.
        let (ni, nj) = (g.neighbors(i), g.neighbors(j));
        let (mut a, mut b) = (0, 0);
        while a < ni.len() && b < nj.len() {
            match ni[a].cmp(&nj[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    let k = ni[a];
                    if k > j {
                        masks.push(1 << e | 1 << edge_index(i, k) | 1 << edge_index(j, k));
                    }
                    a += 1;
                    b += 1;
                }
            }
        }
    }
    masks
}

fn subset_tables(g: &Graph, p: f64, quantity: SampledQuantity) -> SubsetTables {
    let m = g.edge_count();
    let incident_mask = |node: usize| -> u32 {
        g.edges()
            .iter()
            .enumerate()
            .filter(|&(_, &(a, b))| a == node || b == node)
            .fold(0u32, |acc, (e, _)| acc | 1 << e)
    };
    let table = match quantity {
        SampledQuantity::RemovedNodes => {
            QuantityTable::Removed((0..g.node_count()).map(incident_mask).collect())
        }
        SampledQuantity::TotalTriangles => QuantityTable::Triangles(triangle_edge_masks(g)),
        SampledQuantity::EdgeTriangles(l) => {
            assert!(l < m, "edge index {l} out of range ({m} edges)");
            QuantityTable::Triangles(
                triangle_edge_masks(g)
                    .into_iter()
                    .filter(|tri| tri >> l & 1 == 1)
                    .collect(),
            )
        }
        SampledQuantity::NodeDegree(i) => {
            assert!(i < g.node_count(), "node index {i} out of range");
            QuantityTable::Degree(incident_mask(i))
        }
    };
    let q = 1.0 - p;
    SubsetTables {
        edges: m,
        table,
        pow_keep: (0..=m as i32).map(|i| p.powi(i)).collect(),
        pow_drop: (0..=m as i32).map(|i| q.powi(i)).collect(),
    }
}

fn block_sums(tables: &SubsetTables, start: u64, end: u64) -> (f64, f64) {
    let mut mean = 0.0;
    let mut second = 0.0;
    for mask in start..end {
        let mask = mask as u32;
        let kept = mask.count_ones() as usize;
        let weight = tables.pow_keep[kept] * tables.pow_drop[tables.edges - kept];
        let value = match &tables.table {
            QuantityTable::Removed(incident) => {
                incident.iter().filter(|&&inc| mask & inc == 0).count() as f64
            }
            QuantityTable::Triangles(masks) => {
                masks.iter().filter(|&&tri| mask & tri == tri).count() as f64
            }
            QuantityTable::Degree(inc) => (mask & inc).count_ones() as f64,
        };
        mean += weight * value;
        second += weight * value * value;
    }
    (mean, second)
}

fn combine_blocks(
    quantity: SampledQuantity,
    partials: impl IntoIterator<Item = (f64, f64)>,
) -> MomentReport {
    let (mut mean, mut second) = (0.0, 0.0);
    for (m, s) in partials {
        mean += m;
        second += s;
    }
    MomentReport {
        quantity: quantity.label(),
        mean,
        variance: second - mean * mean,
        empirical: None,
    }
}

fn enumeration_tables(g: &Graph, p: f64, quantity: SampledQuantity) -> Result<SubsetTables> {
    assert_probability(p);
    let m = g.edge_count();
    if m > ENUMERATION_MAX_EDGES {
        return Err(Error::EnumerationTooLarge {
            edges: m,
            max: ENUMERATION_MAX_EDGES,
        });
    }
    Ok(subset_tables(g, p, quantity))
}

/// Exact mean and variance of `quantity` under edge sampling, by summing
/// over all `2^M` edge subsets. Subsets are processed in fixed blocks and
/// the block sums combined in index order, so the result is bit-identical
/// to [`enumeration_oracle_serial`] regardless of thread count.
pub fn enumeration_oracle(g: &Graph, p: f64, quantity: SampledQuantity) -> Result<MomentReport> {
    let tables = enumeration_tables(g, p, quantity)?;
    let total = 1u64 << tables.edges;
    let n_blocks = total.div_ceil(SUBSET_BLOCK);
    #[cfg(feature = "parallel")]
    let partials: Vec<(f64, f64)> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * SUBSET_BLOCK;
            block_sums(&tables, start, total.min(start + SUBSET_BLOCK))
        })
        .collect();
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<(f64, f64)> = (0..n_blocks)
        .map(|b| {
            let start = b * SUBSET_BLOCK;
            block_sums(&tables, start, total.min(start + SUBSET_BLOCK))
        })
        .collect();
    Ok(combine_blocks(quantity, partials))
}

/// Single-threaded twin of [`enumeration_oracle`].
pub fn enumeration_oracle_serial(
    g: &Graph,
    p: f64,
    quantity: SampledQuantity,
) -> Result<MomentReport> {
    let tables = enumeration_tables(g, p, quantity)?;
    let total = 1u64 << tables.edges;
    let partials = (0..total.div_ceil(SUBSET_BLOCK)).map(|b| {
        let start = b * SUBSET_BLOCK;
        block_sums(&tables, start, total.min(start + SUBSET_BLOCK))
    });
    Ok(combine_blocks(quantity, partials))
}

fn mean_and_sample_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, ss / (n - 1.0))
}

/// Monte Carlo mean and sample variance of the removed-node count over
/// independently seeded replicates.
pub fn empirical_removed_nodes(
    g: &Graph,
    p: f64,
    replicates: u64,
    seed: u64,
) -> Result<EmpiricalMoments> {
    let values = (0..replicates)
        .map(|r| {
            let s = edge_sample(g, p, derive_seed(seed, "theory:removed", p, r))?;
            Ok(s.removed_nodes() as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, variance) = mean_and_sample_variance(&values);
    Ok(EmpiricalMoments {
        mean,
        variance,
        replicates,
    })
}

/// Monte Carlo mean and sample variance of the surviving triangle count.
pub fn empirical_sampled_triangles(
    g: &Graph,
    p: f64,
    replicates: u64,
    seed: u64,
) -> Result<EmpiricalMoments> {
    let values = (0..replicates)
        .map(|r| {
            let s = edge_sample(g, p, derive_seed(seed, "theory:triangles", p, r))?;
            Ok(edge_triangle_counts(s.graph()).total() as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, variance) = mean_and_sample_variance(&values);
    Ok(EmpiricalMoments {
        mean,
        variance,
        replicates,
    })
}
