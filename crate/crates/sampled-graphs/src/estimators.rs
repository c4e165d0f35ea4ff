//! Reconstruction of parent-graph quantities from an edge sample: moment
//! matching (divide the observation by its retention probability) and
//! posterior means under a discrete prior. Posterior sums run in log space
//! and are collapsed with log-sum-exp, so supports of a few thousand values
//! at small `p` stay finite.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::edge_triangle_counts;
use crate::likelihood::log_binomial_pmf;
use crate::priors::DiscretePrior;
use crate::sampling::SampledGraph;

/// What a per-item estimate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateKind {
    /// One value per sampled node, in sample node order.
    Degree,
    /// One value per sampled edge, in sample edge order.
    EdgeTriangles,
}

impl EstimateKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimateKind::Degree => "degree",
            EstimateKind::EdgeTriangles => "edge_triangles",
        }
    }
}

/// Per-item estimates for the observed nodes or edges of one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceEstimate {
    pub kind: EstimateKind,
    /// `"mme"` or `"bayes"`.
    pub method: &'static str,
    pub values: Vec<f64>,
}

/// Estimate of the parent graph's total triangle count.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalTriangleEstimate {
    pub method: &'static str,
    pub value: f64,
}

fn observed_degrees(s: &SampledGraph) -> Vec<u64> {
    s.graph().degrees().iter().map(|&k| k as u64).collect()
}

fn observed_edge_triangles(s: &SampledGraph) -> Vec<u64> {
    edge_triangle_counts(s.graph()).per_edge().to_vec()
}

/// Moment-matched degrees: observed degree divided by `p`.
pub fn mme_degree(s: &SampledGraph) -> SequenceEstimate {
    let p = s.p();
    SequenceEstimate {
        kind: EstimateKind::Degree,
        method: "mme",
        values: observed_degrees(s).iter().map(|&k| k as f64 / p).collect(),
    }
}

/// Moment-matched per-edge triangle counts: observed count divided by `p^2`,
/// the retention probability of a triangle given its base edge survived.
pub fn mme_edge_triangles(s: &SampledGraph) -> SequenceEstimate {
    let p2 = s.p() * s.p();
    SequenceEstimate {
        kind: EstimateKind::EdgeTriangles,
        method: "mme",
        values: observed_edge_triangles(s)
            .iter()
            .map(|&t| t as f64 / p2)
            .collect(),
    }
}

/// Moment-matched total triangle count: observed total divided by `p^3`.
pub fn mme_total_triangles(s: &SampledGraph) -> TotalTriangleEstimate {
    let p = s.p();
    TotalTriangleEstimate {
        method: "mme",
        value: edge_triangle_counts(s.graph()).total() as f64 / p.powi(3),
    }
}

/// Posterior mean of each value with one log-likelihood term per prior
/// support point. Means depend only on the observed value, so they are
/// computed once per distinct observation.
fn posterior_means(
    observed: &[u64],
    prior: &DiscretePrior,
    log_likelihood: impl Fn(u64, u64) -> f64,
    kind: &'static str,
    item_name: impl Fn(usize) -> String,
) -> Result<Vec<f64>> {
    let mut cache: BTreeMap<u64, Option<f64>> = BTreeMap::new();
    for &obs in observed {
        cache.entry(obs).or_insert_with(|| {
            let mut terms: Vec<(u64, f64)> = Vec::new();
            let mut max_log = f64::NEG_INFINITY;
            for (value, mass) in prior.iter_nonzero() {
                if value < obs {
                    continue;
                }
                let lw = mass.ln() + log_likelihood(obs, value);
                if lw.is_finite() {
                    max_log = max_log.max(lw);
                    terms.push((value, lw));
                }
            }
            if terms.is_empty() {
                return None;
            }
            let mut norm = 0.0;
            let mut weighted = 0.0;
            for (value, lw) in terms {
                let w = (lw - max_log).exp();
                norm += w;
                weighted += value as f64 * w;
            }
            Some(weighted / norm)
        });
    }
    observed
        .iter()
        .enumerate()
        .map(|(i, obs)| {
            cache[obs].ok_or_else(|| Error::ZeroPosteriorMass {
                kind,
                item: item_name(i),
                observed: *obs,
                support_max: prior.support_max(),
            })
        })
        .collect()
}

/// Posterior-mean degrees under `prior`. For observed degree `k'`, the
/// posterior over parent degrees `k >= k'` weighs the prior by the full
/// Binomial(`k`, `p`) likelihood of seeing `k'`.
pub fn bayes_degree(s: &SampledGraph, prior: &DiscretePrior) -> Result<SequenceEstimate> {
    let p = s.p();
    let values = posterior_means(
        &observed_degrees(s),
        prior,
        |obs, k| log_binomial_pmf(obs, k, p),
        "degree",
        |i| s.graph().label(i).to_string(),
    )?;
    Ok(SequenceEstimate {
        kind: EstimateKind::Degree,
        method: "bayes",
        values,
    })
}

/// Posterior-mean per-edge triangle counts under `prior`, conditioned on each
/// observed edge being retained (Binomial(`t`, `p^2`) likelihood).
pub fn bayes_edge_triangles(s: &SampledGraph, prior: &DiscretePrior) -> Result<SequenceEstimate> {
    let p2 = s.p() * s.p();
    let graph = s.graph();
    let values = posterior_means(
        &observed_edge_triangles(s),
        prior,
        |obs, t| log_binomial_pmf(obs, t, p2),
        "edge triangles",
        |e| {
            let (a, b) = graph.edges()[e];
            format!("{}-{}", graph.label(a), graph.label(b))
        },
    )?;
    Ok(SequenceEstimate {
        kind: EstimateKind::EdgeTriangles,
        method: "bayes",
        values,
    })
}

/// Bayes estimate of the parent total: per-edge posterior means summed over
/// the observed edges, then rescaled by `1 / (3p)` for the edges that did not
/// survive (each parent triangle is counted once per surviving edge).
pub fn bayes_total_triangles(
    s: &SampledGraph,
    prior: &DiscretePrior,
) -> Result<TotalTriangleEstimate> {
    let per_edge = bayes_edge_triangles(s, prior)?;
    let sum: f64 = per_edge.values.iter().sum();
    Ok(TotalTriangleEstimate {
        method: "bayes",
        value: sum / (3.0 * s.p()),
    })
}

/// Clustered-triple estimate of the triangle total from a degree histogram
/// alone: `(1/6) * (sum_k k (k-1) P(k) / mean_k)^3`, with `P(k)` the fraction
/// of nodes of degree `k`. Only meaningful when edges are placed
/// independently of each other.
pub fn configuration_model_triangle_estimate(degree_histogram: &[u64]) -> Result<f64> {
    let nodes: u64 = degree_histogram.iter().sum();
    if nodes == 0 {
        return Err(Error::DegenerateHistogram);
    }
    let mut mean = 0.0;
    let mut second_falling = 0.0;
    for (k, &count) in degree_histogram.iter().enumerate() {
        let share = count as f64 / nodes as f64;
        mean += k as f64 * share;
        second_falling += k as f64 * (k as f64 - 1.0) * share;
    }
    if mean == 0.0 {
        return Err(Error::DegenerateHistogram);
    }
    Ok((second_falling / mean).powi(3) / 6.0)
}
