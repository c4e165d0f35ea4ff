//! Undirected simple graphs: construction, random generators, triangle
//! counts, summary statistics and edge-list I/O.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Undirected simple graph with string node labels.
///
/// Nodes are dense indices `0..node_count()`. Each edge is stored once as
/// `(i, j)` with `i < j`, in ascending order; this canonical order is what
/// samplers and estimators iterate over. Self-loops and duplicate edges are
/// dropped at construction. Isolated nodes are representable (generators fix
/// the node count up front), but never arise from plain edge lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<String>,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from labelled endpoint pairs, interning labels in
    /// first-appearance order. Self-loops and duplicates are dropped.
    pub fn from_label_pairs<I, S>(pairs: I) -> Graph
    where
        I: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let mut ids: HashMap<String, usize> = HashMap::new();
        let mut labels = Vec::new();
        let mut edges = Vec::new();
        for (a, b) in pairs {
            let ia = intern(&mut ids, &mut labels, a.as_ref());
            let ib = intern(&mut ids, &mut labels, b.as_ref());
            edges.push((ia, ib));
        }
        Graph::assemble(labels, edges)
    }

    /// Builds a graph on `nodes` indices with stringified labels from numeric
    /// endpoint pairs. Self-loops and duplicates are dropped.
    pub fn from_edges<I>(nodes: usize, pairs: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut edges = Vec::new();
        for (a, b) in pairs {
            if a >= nodes {
                return Err(Error::NodeOutOfRange { id: a, nodes });
            }
            if b >= nodes {
                return Err(Error::NodeOutOfRange { id: b, nodes });
            }
            edges.push((a, b));
        }
        let labels = (0..nodes).map(|i| i.to_string()).collect();
        Ok(Graph::assemble(labels, edges))
    }

    /// Normalizes raw endpoint pairs into the canonical representation.
    pub(crate) fn assemble(labels: Vec<String>, raw: Vec<(usize, usize)>) -> Graph {
        let mut edges: Vec<(usize, usize)> = raw
            .into_iter()
            .filter(|&(a, b)| a != b)
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let mut neighbors = vec![Vec::new(); labels.len()];
        for &(a, b) in &edges {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Graph {
            labels,
            edges,
            neighbors,
        }
    }

    /// Complete graph on `n` nodes.
    pub fn complete(n: usize) -> Graph {
        let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        Graph::from_edges(n, pairs).expect("indices in range")
    }

    /// Path on `n` nodes (`n - 1` edges).
    pub fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("indices in range")
    }

    /// Cycle on `n` nodes; requires `n >= 3`.
    pub fn cycle(n: usize) -> Graph {
        assert!(n >= 3, "cycle needs at least 3 nodes");
        let pairs = (0..n).map(|i| (i, (i + 1) % n));
        Graph::from_edges(n, pairs).expect("indices in range")
    }

    /// Star with one hub (node 0) and `leaves` leaves.
    pub fn star(leaves: usize) -> Graph {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|i| (0, i))).expect("indices in range")
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in canonical order: `(i, j)` with `i < j`, ascending.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn label(&self, node: usize) -> &str {
        &self.labels[node]
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(String::as_str)
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors[node].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    /// Sorted neighbor list of `node`.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors[a].binary_search(&b).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Histogram `h[k]` = number of nodes of degree `k`.
    pub fn degree_histogram(&self) -> Vec<u64> {
        let mut h = vec![0u64; self.max_degree() + 1];
        for list in &self.neighbors {
            h[list.len()] += 1;
        }
        h
    }

    /// Reads a whitespace-separated edge list. Lines starting with `#` and
    /// blank lines are ignored; every other line must hold exactly two labels.
    pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let reader = BufReader::new(file);
        let mut pairs = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut tokens = trimmed.split_whitespace();
            match (tokens.next(), tokens.next(), tokens.next()) {
                (Some(a), Some(b), None) => pairs.push((a.to_string(), b.to_string())),
                _ => {
                    return Err(Error::EdgeListParse {
                        path: path.to_path_buf(),
                        line: idx + 1,
                        content: trimmed.to_string(),
                    })
                }
            }
        }
        Ok(Graph::from_label_pairs(pairs))
    }

    /// Writes edges as `label_a label_b` lines in canonical order.
    pub fn write_edges<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for &(a, b) in &self.edges {
            writeln!(w, "{} {}", self.labels[a], self.labels[b])?;
        }
        Ok(())
    }

    /// Writes the edge list to `path`; see [`Graph::write_edges`].
    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut w = BufWriter::new(file);
        self.write_edges(&mut w)
            .and_then(|_| w.flush())
            .map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })
    }
}

fn intern(ids: &mut HashMap<String, usize>, labels: &mut Vec<String>, label: &str) -> usize {
    if let Some(&id) = ids.get(label) {
        return id;
    }
    let id = labels.len();
    ids.insert(label.to_string(), id);
    labels.push(label.to_string());
    id
}

/// Uniform simple graph with exactly `n` nodes and `m` distinct edges.
pub fn erdos_renyi(n: usize, m: usize, seed: u64) -> Result<Graph> {
    let capacity = n as u64 * (n.saturating_sub(1)) as u64 / 2;
    if m as u64 > capacity {
        return Err(Error::EdgeCapacity {
            requested: m,
            capacity,
            nodes: n,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Floyd's sampling: a uniform m-subset of pair indices in O(m) draws.
    let mut chosen = std::collections::HashSet::with_capacity(m);
    for t in (capacity - m as u64)..capacity {
        let r = rng.gen_range(0..=t);
        if !chosen.insert(r) {
            chosen.insert(t);
        }
    }
    let pairs: Vec<(usize, usize)> = chosen.into_iter().map(|e| unrank_pair(e, n)).collect();
    Graph::from_edges(n, pairs)
}

/// Maps a pair index in `[0, n(n-1)/2)` to the lexicographic `(i, j)`, `i < j`.
fn unrank_pair(index: u64, n: usize) -> (usize, usize) {
    let n = n as u64;
    let row_start = |i: u64| i * n - i * (i + 1) / 2;
    let (mut lo, mut hi) = (0u64, n - 1);
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if row_start(mid) <= index {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let i = lo;
    let j = i + 1 + (index - row_start(i));
    (i as usize, j as usize)
}

/// Preferential-attachment graph: `m_attach` seed nodes start empty, every
/// later node attaches `m_attach` distinct edges drawn proportionally to
/// degree, so the final edge count is `m_attach * (n - m_attach)`.
pub fn barabasi_albert(n: usize, m_attach: usize, seed: u64) -> Result<Graph> {
    if m_attach == 0 || n <= m_attach {
        return Err(Error::GeneratorParams {
            reason: format!("need 1 <= m_attach < n, got n={n}, m_attach={m_attach}"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(m_attach * (n - m_attach));
    // One entry per edge endpoint, so uniform draws follow the degrees.
    let mut endpoint_pool: Vec<usize> = Vec::with_capacity(2 * m_attach * (n - m_attach));
    let mut targets: Vec<usize> = (0..m_attach).collect();
    for v in m_attach..n {
        for &t in &targets {
            edges.push((t, v));
        }
        endpoint_pool.extend_from_slice(&targets);
        endpoint_pool.extend(std::iter::repeat(v).take(m_attach));
        if v + 1 < n {
            targets.clear();
            while targets.len() < m_attach {
                let cand = endpoint_pool[rng.gen_range(0..endpoint_pool.len())];
                if !targets.contains(&cand) {
                    targets.push(cand);
                }
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// Triangle counts of a graph: one count per edge in canonical edge order,
/// one per node, and the total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangleCounts {
    per_edge: Vec<u64>,
    per_node: Vec<u64>,
    total: u64,
}

impl TriangleCounts {
    /// Triangles through each edge, aligned with [`Graph::edges`].
    pub fn per_edge(&self) -> &[u64] {
        &self.per_edge
    }

    /// Triangles through each node.
    pub fn per_node(&self) -> &[u64] {
        &self.per_node
    }

    /// Total number of triangles.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of unordered triangle pairs that share an edge:
    /// `sum over edges of C(count, 2)`.
    pub fn shared_edge_pairs(&self) -> u64 {
        self.per_edge
            .iter()
            .map(|&t| t * t.saturating_sub(1) / 2)
            .sum()
    }

    /// Sum of squared per-edge counts.
    pub fn sum_squared(&self) -> f64 {
        self.per_edge.iter().map(|&t| (t as f64) * (t as f64)).sum()
    }

    fn from_per_edge(g: &Graph, per_edge: Vec<u64>) -> TriangleCounts {
        let mut incident = vec![0u64; g.node_count()];
        let mut total3 = 0u64;
        for (e, &(a, b)) in g.edges().iter().enumerate() {
            incident[a] += per_edge[e];
            incident[b] += per_edge[e];
            total3 += per_edge[e];
        }
        debug_assert_eq!(total3 % 3, 0);
        let per_node = incident
            .into_iter()
            .map(|twice| {
                debug_assert_eq!(twice % 2, 0);
                twice / 2
            })
            .collect();
        TriangleCounts {
            per_edge,
            per_node,
            total: total3 / 3,
        }
    }
}

fn common_neighbors(g: &Graph, a: usize, b: usize) -> u64 {
    let (mut x, mut y) = (g.neighbors(a), g.neighbors(b));
    if x.len() > y.len() {
        std::mem::swap(&mut x, &mut y);
    }
    let mut count = 0u64;
    let mut j = 0;
    for &u in x {
        while j < y.len() && y[j] < u {
            j += 1;
        }
        if j == y.len() {
            break;
        }
        if y[j] == u {
            count += 1;
            j += 1;
        }
    }
    count
}

/// Per-edge, per-node and total triangle counts via sorted-adjacency
/// intersection. Runs over edges in parallel when the `parallel` feature is
/// enabled.
pub fn edge_triangle_counts(g: &Graph) -> TriangleCounts {
    #[cfg(feature = "parallel")]
    let per_edge: Vec<u64> = g
        .edges()
        .par_iter()
        .map(|&(a, b)| common_neighbors(g, a, b))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let per_edge: Vec<u64> = g
        .edges()
        .iter()
        .map(|&(a, b)| common_neighbors(g, a, b))
        .collect();
    TriangleCounts::from_per_edge(g, per_edge)
}

/// Sequential twin of [`edge_triangle_counts`], available regardless of
/// features; used as the baseline in benchmarks.
pub fn edge_triangle_counts_serial(g: &Graph) -> TriangleCounts {
    let per_edge: Vec<u64> = g
        .edges()
        .iter()
        .map(|&(a, b)| common_neighbors(g, a, b))
        .collect();
    TriangleCounts::from_per_edge(g, per_edge)
}

/// Whole-graph summary: size, degree extremes, degree assortativity,
/// triangle totals and clustering.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub nodes: usize,
    pub edges: usize,
    pub max_degree: usize,
    /// Pearson correlation of degrees over the `2M` ordered edge endpoints.
    pub assortativity: f64,
    /// True when endpoint degrees have zero variance (assortativity forced
    /// to 0).
    pub assortativity_degenerate: bool,
    pub triangles: u64,
    /// Mean local clustering over all nodes; nodes of degree < 2 count as 0.
    pub mean_clustering: f64,
    /// Mean triangles per edge, `3T / M`.
    pub mean_edge_triangles: f64,
}

/// Computes [`SummaryStats`] for a graph.
pub fn graph_stats(g: &Graph) -> SummaryStats {
    let tc = edge_triangle_counts(g);
    let degrees = g.degrees();
    let m = g.edge_count();

    // Endpoint-degree sums kept in integers so the degenerate case is exact.
    let mut s1 = 0u128; // sum of endpoint degrees
    let mut s2 = 0u128; // sum of squared endpoint degrees
    let mut sxy = 0u128; // sum of k_i * k_j over ordered endpoints
    for &(a, b) in g.edges() {
        let (ka, kb) = (degrees[a] as u128, degrees[b] as u128);
        s1 += ka + kb;
        s2 += ka * ka + kb * kb;
        sxy += 2 * ka * kb;
    }
    let pairs = 2 * m as u128;
    let (assortativity, degenerate) = if pairs == 0 {
        (0.0, true)
    } else {
        let var_num = pairs * s2 - s1 * s1;
        if var_num == 0 {
            (0.0, true)
        } else {
            let cov_num = pairs as i128 * sxy as i128 - (s1 * s1) as i128;
            (cov_num as f64 / var_num as f64, false)
        }
    };

    let mean_clustering = if g.node_count() == 0 {
        0.0
    } else {
        let sum: f64 = (0..g.node_count())
            .map(|i| {
                let k = degrees[i];
                if k < 2 {
                    0.0
                } else {
                    2.0 * tc.per_node()[i] as f64 / (k as f64 * (k as f64 - 1.0))
                }
            })
            .sum();
        sum / g.node_count() as f64
    };

    SummaryStats {
        nodes: g.node_count(),
        edges: m,
        max_degree: g.max_degree(),
        assortativity,
        assortativity_degenerate: degenerate,
        triangles: tc.total(),
        mean_clustering,
        mean_edge_triangles: if m == 0 {
            0.0
        } else {
            3.0 * tc.total() as f64 / m as f64
        },
    }
}
