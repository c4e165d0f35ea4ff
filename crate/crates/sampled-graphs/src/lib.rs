//! Edge sampling of undirected simple graphs and reconstruction of what was
//! lost: degree sequences, per-edge triangle counts and the total triangle
//! count.
//!
//! The pipeline has three stages:
//!
//! * [`graph`] builds, generates and summarizes graphs;
//! * [`sampling`] keeps each edge independently with probability `p` and
//!   discards nodes left without edges;
//! * [`estimators`] maps the observed quantities back: either by moment
//!   matching (divide by the retention probability of the quantity) or by
//!   posterior means under a discrete prior from [`priors`].
//!
//! [`theory`] provides closed-form means and variances for the sampled
//! quantities plus an exhaustive-enumeration oracle for small graphs, and
//! [`harness`] runs seeded sweep experiments over a probability grid.
//!
//! With the default `parallel` feature, triangle counting, enumeration and
//! experiment replicates run on rayon; disable default features for a fully
//! sequential build with identical outputs.

pub mod error;
pub mod estimators;
pub mod graph;
pub mod harness;
pub mod likelihood;
pub mod priors;
pub mod sampling;
pub mod theory;

pub use error::{Error, Result};
pub use estimators::{
    bayes_degree, bayes_edge_triangles, bayes_total_triangles,
    configuration_model_triangle_estimate, mme_degree, mme_edge_triangles, mme_total_triangles,
    EstimateKind, SequenceEstimate, TotalTriangleEstimate,
};
pub use graph::{
    barabasi_albert, edge_triangle_counts, erdos_renyi, graph_stats, Graph, SummaryStats,
    TriangleCounts,
};
pub use harness::{
    run_degree_experiment, run_experiment, run_triangle_experiment, summarize,
    write_experiment_outputs, ExperimentConfig, ExperimentKind, ExperimentResult, GraphSource,
};
pub use priors::{
    link_cascade_prior, minimisation_prior, poisson_triangle_prior, true_prior_degree,
    true_prior_triangles, DiscretePrior,
};
pub use sampling::{derive_seed, edge_sample, SampledGraph};
pub use theory::{
    enumeration_oracle, enumeration_oracle_serial, expected_removed_nodes,
    expected_sampled_triangles, variance_edge_triangles, variance_removed_nodes,
    variance_total_triangles, MomentReport, SampledQuantity,
};
