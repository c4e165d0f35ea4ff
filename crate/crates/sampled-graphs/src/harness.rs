//! Experiment driver: sweep a grid of retention probabilities with
//! replicated sampling, score every requested estimator against the parent
//! graph, and emit plot-ready CSV files. Replicate jobs run in parallel;
//! rows are merged in canonical `(p, replicate, estimator)` order so a rerun
//! with the same master seed reproduces every output byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::estimators::{
    bayes_degree, bayes_edge_triangles, mme_degree, mme_edge_triangles, EstimateKind,
    SequenceEstimate,
};
use crate::graph::{barabasi_albert, edge_triangle_counts, erdos_renyi, Graph, TriangleCounts};
use crate::priors::{
    link_cascade_prior, minimisation_prior, poisson_triangle_prior, true_prior_degree,
    true_prior_triangles, DiscretePrior,
};
use crate::sampling::{derive_seed, edge_sample, SampledGraph};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Where an experiment's parent graph comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphSource {
    ErdosRenyi {
        nodes: usize,
        edges: usize,
        seed: u64,
    },
    BarabasiAlbert {
        nodes: usize,
        attach: usize,
        seed: u64,
    },
    File(PathBuf),
}

impl GraphSource {
    /// Parses `er:<nodes>:<edges>:<seed>`, `ba:<nodes>:<attach>:<seed>`,
    /// or `file:<path>`.
    pub fn parse(text: &str) -> std::result::Result<GraphSource, String> {
        let fields: Vec<&str> = text.split(':').collect();
        let number = |s: &str, what: &str| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| format!("bad {what} {s:?} in graph spec {text:?}"))
        };
        match fields.as_slice() {
            ["er", n, m, seed] => Ok(GraphSource::ErdosRenyi {
                nodes: number(n, "node count")? as usize,
                edges: number(m, "edge count")? as usize,
                seed: number(seed, "seed")?,
            }),
            ["ba", n, m, seed] => Ok(GraphSource::BarabasiAlbert {
                nodes: number(n, "node count")? as usize,
                attach: number(m, "attachment count")? as usize,
                seed: number(seed, "seed")?,
            }),
            ["file", rest @ ..] if !rest.is_empty() => {
                Ok(GraphSource::File(PathBuf::from(rest.join(":"))))
            }
            _ => Err(format!(
                "graph spec {text:?} is not er:<n>:<m>:<seed>, ba:<n>:<m>:<seed>, or file:<path>"
            )),
        }
    }

    pub fn load(&self) -> Result<Graph> {
        match self {
            GraphSource::ErdosRenyi { nodes, edges, seed } => erdos_renyi(*nodes, *edges, *seed),
            GraphSource::BarabasiAlbert {
                nodes,
                attach,
                seed,
            } => barabasi_albert(*nodes, *attach, *seed),
            GraphSource::File(path) => Graph::read_edge_list(path),
        }
    }
}

/// Which quantity an experiment reconstructs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Degree,
    Triangles,
}

/// Degree estimators the harness can score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeMethod {
    Mme,
    BayesTrue,
    BayesMin,
    BayesCascade,
}

impl DegreeMethod {
    pub const ALL: [DegreeMethod; 4] = [
        DegreeMethod::Mme,
        DegreeMethod::BayesTrue,
        DegreeMethod::BayesMin,
        DegreeMethod::BayesCascade,
    ];

    pub fn label(self) -> &'static str {
        match self {
            DegreeMethod::Mme => "mme",
            DegreeMethod::BayesTrue => "bayes_true",
            DegreeMethod::BayesMin => "bayes_min",
            DegreeMethod::BayesCascade => "bayes_cascade",
        }
    }

    pub fn parse(label: &str) -> Option<DegreeMethod> {
        Self::ALL.into_iter().find(|m| m.label() == label)
    }
}

/// Triangle estimators the harness can score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangleMethod {
    Mme,
    BayesTrue,
    BayesPoisson,
}

impl TriangleMethod {
    pub const ALL: [TriangleMethod; 3] = [
        TriangleMethod::Mme,
        TriangleMethod::BayesTrue,
        TriangleMethod::BayesPoisson,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TriangleMethod::Mme => "mme",
            TriangleMethod::BayesTrue => "bayes_true",
            TriangleMethod::BayesPoisson => "bayes_poisson",
        }
    }

    pub fn parse(label: &str) -> Option<TriangleMethod> {
        Self::ALL.into_iter().find(|m| m.label() == label)
    }
}

pub const DEFAULT_P_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Everything one experiment run needs; usually parsed from a flat
/// `key = value` config file via [`ExperimentConfig::from_file`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Label stamped on every output row; also salts the replicate seeds.
    pub dataset: String,
    pub source: GraphSource,
    pub kind: ExperimentKind,
    pub p_grid: Vec<f64>,
    pub replicates: u64,
    /// Master seed; every sample and prior seed is derived from it.
    pub seed: u64,
    /// Proposal count for the minimisation prior.
    pub iterations: usize,
    pub degree_methods: Vec<DegreeMethod>,
    pub triangle_methods: Vec<TriangleMethod>,
    pub output: PathBuf,
    /// Emit per-item truth/estimate pairs for replicate 0 of each p.
    pub scatter: bool,
}

impl ExperimentConfig {
    /// Config with defaults filled in: full p grid, 10 replicates, 15000
    /// minimisation iterations, all estimators for the chosen kind.
    pub fn new(dataset: &str, source: GraphSource, kind: ExperimentKind) -> ExperimentConfig {
        ExperimentConfig {
            dataset: dataset.to_string(),
            source,
            kind,
            p_grid: DEFAULT_P_GRID.to_vec(),
            replicates: 10,
            seed: 1,
            iterations: 15_000,
            degree_methods: DegreeMethod::ALL.to_vec(),
            triangle_methods: TriangleMethod::ALL.to_vec(),
            output: PathBuf::from("results"),
            scatter: true,
        }
    }

    /// Parses a flat `key = value` file. Blank lines and `#` comments are
    /// skipped. Keys: `dataset`, `graph`, `experiment`, `p_grid`,
    /// `replicates`, `seed`, `iterations`, `estimators`, `output`,
    /// `scatter`.
    pub fn from_file(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        parse_config(&text, path)
    }
}

fn parse_config(text: &str, path: &Path) -> Result<ExperimentConfig> {
    let mut pairs: Vec<(usize, String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::ConfigParse {
                path: path.to_path_buf(),
                line: idx + 1,
                reason: format!("expected 'key = value', got {line:?}"),
            });
        };
        pairs.push((idx + 1, key.trim().to_string(), value.trim().to_string()));
    }

    let mut lookup: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (line, key, value) in &pairs {
        if lookup.insert(key, (*line, value)).is_some() {
            return Err(Error::ConfigParse {
                path: path.to_path_buf(),
                line: *line,
                reason: format!("duplicate key {key:?}"),
            });
        }
    }
    const KNOWN: [&str; 10] = [
        "dataset",
        "graph",
        "experiment",
        "p_grid",
        "replicates",
        "seed",
        "iterations",
        "estimators",
        "output",
        "scatter",
    ];
    for (line, key, _) in &pairs {
        if !KNOWN.contains(&key.as_str()) {
            return Err(Error::ConfigParse {
                path: path.to_path_buf(),
                line: *line,
                reason: format!("unknown key {key:?}"),
            });
        }
    }

    let parse_fail = |line: usize, reason: String| Error::ConfigParse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let required = |key: &str| {
        lookup
            .get(key)
            .copied()
            .ok_or_else(|| Error::ConfigInvalid {
                path: path.to_path_buf(),
                reason: format!("missing required key {key:?}"),
            })
    };

    let (_, dataset) = required("dataset")?;
    let (line, graph) = required("graph")?;
    let source = GraphSource::parse(graph).map_err(|reason| parse_fail(line, reason))?;
    let (line, kind_text) = required("experiment")?;
    let kind = match kind_text {
        "degree" => ExperimentKind::Degree,
        "triangles" => ExperimentKind::Triangles,
        other => {
            return Err(parse_fail(
                line,
                format!("experiment must be 'degree' or 'triangles', got {other:?}"),
            ))
        }
    };

    let mut cfg = ExperimentConfig::new(dataset, source, kind);
    if dataset.is_empty() {
        return Err(Error::ConfigInvalid {
            path: path.to_path_buf(),
            reason: "dataset label must not be empty".into(),
        });
    }

    if let Some(&(line, text)) = lookup.get("p_grid") {
        let mut grid = Vec::new();
        for field in text.split(',') {
            let p: f64 = field.trim().parse().map_err(|_| {
                parse_fail(
                    line,
                    format!("bad probability {:?} in p_grid", field.trim()),
                )
            })?;
            if !(p > 0.0 && p <= 1.0) {
                return Err(parse_fail(line, format!("p_grid entry {p} outside (0, 1]")));
            }
            grid.push(p);
        }
        if grid.is_empty() {
            return Err(parse_fail(line, "p_grid must not be empty".into()));
        }
        cfg.p_grid = grid;
    }
    if let Some(&(line, text)) = lookup.get("replicates") {
        cfg.replicates = text
            .parse()
            .map_err(|_| parse_fail(line, format!("bad replicate count {text:?}")))?;
        if cfg.replicates == 0 {
            return Err(parse_fail(line, "replicates must be at least 1".into()));
        }
    }
    if let Some(&(line, text)) = lookup.get("seed") {
        cfg.seed = text
            .parse()
            .map_err(|_| parse_fail(line, format!("bad seed {text:?}")))?;
    }
    if let Some(&(line, text)) = lookup.get("iterations") {
        cfg.iterations = text
            .parse()
            .map_err(|_| parse_fail(line, format!("bad iteration count {text:?}")))?;
    }
    if let Some(&(line, text)) = lookup.get("estimators") {
        match kind {
            ExperimentKind::Degree => {
                cfg.degree_methods = text
                    .split(',')
                    .map(|f| {
                        DegreeMethod::parse(f.trim()).ok_or_else(|| {
                            parse_fail(line, format!("unknown degree estimator {:?}", f.trim()))
                        })
                    })
                    .collect::<Result<_>>()?;
            }
            ExperimentKind::Triangles => {
                cfg.triangle_methods = text
                    .split(',')
                    .map(|f| {
                        TriangleMethod::parse(f.trim()).ok_or_else(|| {
                            parse_fail(line, format!("unknown triangle estimator {:?}", f.trim()))
                        })
                    })
                    .collect::<Result<_>>()?;
            }
        }
    }
    if let Some(&(_, text)) = lookup.get("output") {
        cfg.output = PathBuf::from(text);
    }
    if let Some(&(line, text)) = lookup.get("scatter") {
        cfg.scatter = match text {
            "true" => true,
            "false" => false,
            other => {
                return Err(parse_fail(
                    line,
                    format!("scatter must be 'true' or 'false', got {other:?}"),
                ))
            }
        };
    }
    Ok(cfg)
}

/// One scored metric of one estimator on one sampled replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub dataset: String,
    pub p: f64,
    pub replicate: u64,
    pub estimator: &'static str,
    pub metric: &'static str,
    pub value: f64,
}

/// A replicate-level failure (typically prior construction); the run
/// records it and continues.
#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    pub dataset: String,
    pub p: f64,
    pub replicate: u64,
    pub estimator: &'static str,
    pub message: String,
}

/// Per-item truth/estimate pairs captured from replicate 0 of one p.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterSet {
    pub p: f64,
    pub estimator: &'static str,
    /// `(item label, truth, estimate)` in sample order.
    pub points: Vec<(String, f64, f64)>,
}

/// Everything an experiment produced, in canonical row order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
    pub errors: Vec<RowError>,
    pub scatters: Vec<ScatterSet>,
}

/// Mean and spread of one metric over the replicates of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub dataset: String,
    pub p: f64,
    pub estimator: &'static str,
    pub metric: &'static str,
    pub mean: f64,
    pub sd: f64,
    pub replicates: u64,
}

fn rmse(truth: &[f64], estimates: &[f64]) -> Result<f64> {
    if truth.len() != estimates.len() {
        return Err(Error::LengthMismatch {
            truth: truth.len(),
            estimates: estimates.len(),
        });
    }
    if truth.is_empty() {
        return Ok(0.0);
    }
    let ss: f64 = truth
        .iter()
        .zip(estimates)
        .map(|(t, e)| (t - e) * (t - e))
        .sum();
    Ok((ss / truth.len() as f64).sqrt())
}

fn expect_kind(est: &SequenceEstimate, expected: EstimateKind) -> Result<()> {
    if est.kind != expected {
        return Err(Error::KindMismatch {
            expected: expected.name(),
            actual: est.kind.name(),
        });
    }
    Ok(())
}

/// Root mean squared degree error over the sampled nodes, `truth` aligned
/// with sample node order (parent degree of each sampled node).
pub fn rmse_degree(truth: &[f64], est: &SequenceEstimate) -> Result<f64> {
    expect_kind(est, EstimateKind::Degree)?;
    rmse(truth, &est.values)
}

/// Root mean squared per-edge triangle error over the retained edges.
pub fn rmse_edge_triangles(truth: &[f64], est: &SequenceEstimate) -> Result<f64> {
    expect_kind(est, EstimateKind::EdgeTriangles)?;
    rmse(truth, &est.values)
}

/// Parent degree of each sampled node, in sample node order.
pub fn degree_truth(parent: &Graph, s: &SampledGraph) -> Vec<f64> {
    (0..s.graph().node_count())
        .map(|i| parent.degree(s.parent_node(i)) as f64)
        .collect()
}

/// Parent triangle count of each retained edge, in sample edge order.
pub fn triangle_truth(parent_counts: &TriangleCounts, s: &SampledGraph) -> Vec<f64> {
    (0..s.graph().edge_count())
        .map(|e| parent_counts.per_edge()[s.parent_edge(e)] as f64)
        .collect()
}

/// Shared context for every replicate job of one experiment.
struct RunContext<'a> {
    cfg: &'a ExperimentConfig,
    parent: &'a Graph,
    parent_counts: &'a TriangleCounts,
    true_degree_prior: &'a DiscretePrior,
    true_triangle_prior: &'a DiscretePrior,
}

/// Output of one (p, replicate) job, later merged in job order.
struct JobOutput {
    rows: Vec<ResultRow>,
    errors: Vec<RowError>,
    scatters: Vec<ScatterSet>,
}

fn degree_estimate(
    ctx: &RunContext,
    s: &SampledGraph,
    method: DegreeMethod,
    p: f64,
    replicate: u64,
) -> Result<SequenceEstimate> {
    let cfg = ctx.cfg;
    match method {
        DegreeMethod::Mme => Ok(mme_degree(s)),
        DegreeMethod::BayesTrue => bayes_degree(s, ctx.true_degree_prior),
        DegreeMethod::BayesMin => {
            let seed = derive_seed(
                cfg.seed,
                &format!("prior:min:{}", cfg.dataset),
                p,
                replicate,
            );
            let fit = minimisation_prior(s, cfg.iterations, seed)?;
            bayes_degree(s, &fit.prior)
        }
        DegreeMethod::BayesCascade => {
            let seed = derive_seed(
                cfg.seed,
                &format!("prior:cascade:{}", cfg.dataset),
                p,
                replicate,
            );
            let fit = link_cascade_prior(s, ctx.parent.node_count(), seed)?;
            bayes_degree(s, &fit.prior)
        }
    }
}

fn triangle_estimate(
    ctx: &RunContext,
    s: &SampledGraph,
    method: TriangleMethod,
) -> Result<SequenceEstimate> {
    match method {
        TriangleMethod::Mme => Ok(mme_edge_triangles(s)),
        TriangleMethod::BayesTrue => bayes_edge_triangles(s, ctx.true_triangle_prior),
        TriangleMethod::BayesPoisson => {
            let prior = poisson_triangle_prior(s)?;
            bayes_edge_triangles(s, &prior)
        }
    }
}

fn item_labels(s: &SampledGraph, kind: EstimateKind) -> Vec<String> {
    let g = s.graph();
    match kind {
        EstimateKind::Degree => (0..g.node_count())
            .map(|i| g.label(i).to_string())
            .collect(),
        EstimateKind::EdgeTriangles => g
            .edges()
            .iter()
            .map(|&(a, b)| format!("{}-{}", g.label(a), g.label(b)))
            .collect(),
    }
}

fn run_job(ctx: &RunContext, p: f64, replicate: u64) -> JobOutput {
    let cfg = ctx.cfg;
    let mut out = JobOutput {
        rows: Vec::new(),
        errors: Vec::new(),
        scatters: Vec::new(),
    };
    let seed = derive_seed(cfg.seed, &format!("sample:{}", cfg.dataset), p, replicate);
    let s = match edge_sample(ctx.parent, p, seed) {
        Ok(s) => s,
        Err(err) => {
            out.errors.push(RowError {
                dataset: cfg.dataset.clone(),
                p,
                replicate,
                estimator: "sample",
                message: err.to_string(),
            });
            return out;
        }
    };
    let capture_scatter = cfg.scatter && replicate == 0;
    let row = |estimator: &'static str, metric: &'static str, value: f64| ResultRow {
        dataset: cfg.dataset.clone(),
        p,
        replicate,
        estimator,
        metric,
        value,
    };

    match cfg.kind {
        ExperimentKind::Degree => {
            let truth = degree_truth(ctx.parent, &s);
            for &method in &cfg.degree_methods {
                match degree_estimate(ctx, &s, method, p, replicate) {
                    Ok(est) => {
                        let score = rmse_degree(&truth, &est).expect("aligned by construction");
                        out.rows.push(row(method.label(), "rmse_degree", score));
                        if capture_scatter {
                            out.scatters
                                .push(scatter_set(&s, &truth, &est, p, method.label()));
                        }
                    }
                    Err(err) => out.errors.push(RowError {
                        dataset: cfg.dataset.clone(),
                        p,
                        replicate,
                        estimator: method.label(),
                        message: err.to_string(),
                    }),
                }
            }
        }
        ExperimentKind::Triangles => {
            let truth = triangle_truth(ctx.parent_counts, &s);
            let parent_total = ctx.parent_counts.total() as f64;
            for &method in &cfg.triangle_methods {
                match triangle_estimate(ctx, &s, method) {
                    Ok(est) => {
                        let score =
                            rmse_edge_triangles(&truth, &est).expect("aligned by construction");
                        // Every parent triangle appears on three edges, and
                        // only a p fraction of edges are seen: dividing the
                        // per-edge sum by 3p recovers the total. For MME
                        // this reduces to T' / p^3.
                        let total = est.values.iter().sum::<f64>() / (3.0 * p);
                        out.rows
                            .push(row(method.label(), "rmse_edge_triangles", score));
                        out.rows.push(row(method.label(), "total_estimate", total));
                        out.rows.push(row(
                            method.label(),
                            "total_sq_error",
                            (total - parent_total) * (total - parent_total),
                        ));
                        if capture_scatter {
                            out.scatters
                                .push(scatter_set(&s, &truth, &est, p, method.label()));
                        }
                    }
                    Err(err) => out.errors.push(RowError {
                        dataset: cfg.dataset.clone(),
                        p,
                        replicate,
                        estimator: method.label(),
                        message: err.to_string(),
                    }),
                }
            }
        }
    }
    out
}

fn scatter_set(
    s: &SampledGraph,
    truth: &[f64],
    est: &SequenceEstimate,
    p: f64,
    estimator: &'static str,
) -> ScatterSet {
    let labels = item_labels(s, est.kind);
    ScatterSet {
        p,
        estimator,
        points: labels
            .into_iter()
            .zip(truth.iter().zip(&est.values))
            .map(|(label, (&t, &e))| (label, t, e))
            .collect(),
    }
}

fn run(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let parent = cfg.source.load()?;
    let parent_counts = edge_triangle_counts(&parent);
    let true_degree_prior = true_prior_degree(&parent)?;
    let true_triangle_prior = match cfg.kind {
        // A parent with no edges cannot seed a triangle prior; the degree
        // experiment never touches it, so substitute a point mass there.
        ExperimentKind::Triangles => true_prior_triangles(&parent)?,
        ExperimentKind::Degree => DiscretePrior::from_weights(vec![1.0])?,
    };
    let ctx = RunContext {
        cfg,
        parent: &parent,
        parent_counts: &parent_counts,
        true_degree_prior: &true_degree_prior,
        true_triangle_prior: &true_triangle_prior,
    };

    let jobs: Vec<(f64, u64)> = cfg
        .p_grid
        .iter()
        .flat_map(|&p| (0..cfg.replicates).map(move |r| (p, r)))
        .collect();
    #[cfg(feature = "parallel")]
    let outputs: Vec<JobOutput> = jobs.par_iter().map(|&(p, r)| run_job(&ctx, p, r)).collect();
    #[cfg(not(feature = "parallel"))]
    let outputs: Vec<JobOutput> = jobs.iter().map(|&(p, r)| run_job(&ctx, p, r)).collect();

    let mut result = ExperimentResult::default();
    for out in outputs {
        result.rows.extend(out.rows);
        result.errors.extend(out.errors);
        result.scatters.extend(out.scatters);
    }
    Ok(result)
}

/// Sweeps the grid scoring the configured degree estimators.
pub fn run_degree_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    assert!(
        cfg.kind == ExperimentKind::Degree,
        "config is not a degree experiment"
    );
    run(cfg)
}

/// Sweeps the grid scoring the configured triangle estimators.
pub fn run_triangle_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    assert!(
        cfg.kind == ExperimentKind::Triangles,
        "config is not a triangle experiment"
    );
    run(cfg)
}

/// Dispatches on the configured experiment kind.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run(cfg)
}

/// Collapses result rows to per-(dataset, p, estimator, metric) mean and
/// sample standard deviation, in first-appearance order.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut order: Vec<(String, u64, &'static str, &'static str)> = Vec::new();
    let mut groups: BTreeMap<(String, u64, &'static str, &'static str), Vec<f64>> = BTreeMap::new();
    for r in rows {
        let key = (r.dataset.clone(), r.p.to_bits(), r.estimator, r.metric);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r.value);
    }
    order
        .into_iter()
        .map(|key| {
            let values = &groups[&key];
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let sd = if values.len() < 2 {
                0.0
            } else {
                (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
            };
            SummaryRow {
                dataset: key.0,
                p: f64::from_bits(key.1),
                estimator: key.2,
                metric: key.3,
                mean,
                sd,
                replicates: values.len() as u64,
            }
        })
        .collect()
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_io(path: &Path, err: csv::Error) -> Error {
    match err.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::other(format!("csv error: {other:?}")),
        },
    }
}

/// Writes `dataset,p,replicate,estimator,metric,value` rows.
pub fn write_results_csv(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    let io = |e| csv_io(path, e);
    w.write_record(["dataset", "p", "replicate", "estimator", "metric", "value"])
        .map_err(io)?;
    for r in rows {
        w.write_record([
            r.dataset.as_str(),
            &r.p.to_string(),
            &r.replicate.to_string(),
            r.estimator,
            r.metric,
            &r.value.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `dataset,p,estimator,metric,mean,sd,replicates` rows.
pub fn write_summary_csv(rows: &[SummaryRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    let io = |e| csv_io(path, e);
    w.write_record([
        "dataset",
        "p",
        "estimator",
        "metric",
        "mean",
        "sd",
        "replicates",
    ])
    .map_err(io)?;
    for r in rows {
        w.write_record([
            r.dataset.as_str(),
            &r.p.to_string(),
            r.estimator,
            r.metric,
            &r.mean.to_string(),
            &r.sd.to_string(),
            &r.replicates.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `dataset,p,replicate,estimator,message` rows.
pub fn write_errors_csv(errors: &[RowError], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    let io = |e| csv_io(path, e);
    w.write_record(["dataset", "p", "replicate", "estimator", "message"])
        .map_err(io)?;
    for r in errors {
        w.write_record([
            r.dataset.as_str(),
            &r.p.to_string(),
            &r.replicate.to_string(),
            r.estimator,
            &r.message,
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `estimator,item,truth,estimate` rows for all scatter sets of one
/// grid point.
pub fn write_scatter_csv(sets: &[&ScatterSet], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    let io = |e| csv_io(path, e);
    w.write_record(["estimator", "item", "truth", "estimate"])
        .map_err(io)?;
    for set in sets {
        for (item, truth, estimate) in &set.points {
            w.write_record([
                set.estimator,
                item,
                &truth.to_string(),
                &estimate.to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes bare `truth,estimate` pairs for one estimate, aligned by item.
pub fn scatter_export(truth: &[f64], est: &SequenceEstimate, path: impl AsRef<Path>) -> Result<()> {
    if truth.len() != est.values.len() {
        return Err(Error::LengthMismatch {
            truth: truth.len(),
            estimates: est.values.len(),
        });
    }
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    let io = |e| csv_io(path, e);
    w.write_record(["truth", "estimate"]).map_err(io)?;
    for (t, e) in truth.iter().zip(&est.values) {
        w.write_record([&t.to_string(), &e.to_string()])
            .map_err(io)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `results.csv`, `summary.csv`, `errors.csv` (only when errors
/// occurred), and per-p `scatter_<p>.csv` files into the configured output
/// directory, creating it if needed. Returns the paths written.
pub fn write_experiment_outputs(
    cfg: &ExperimentConfig,
    result: &ExperimentResult,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(&cfg.output).map_err(|source| Error::Io {
        path: cfg.output.clone(),
        source,
    })?;
    let mut written = Vec::new();

    let results_path = cfg.output.join("results.csv");
    write_results_csv(&result.rows, &results_path)?;
    written.push(results_path);

    let summary_path = cfg.output.join("summary.csv");
    write_summary_csv(&summarize(&result.rows), &summary_path)?;
    written.push(summary_path);

    if !result.errors.is_empty() {
        let errors_path = cfg.output.join("errors.csv");
        write_errors_csv(&result.errors, &errors_path)?;
        written.push(errors_path);
    }

    if cfg.scatter {
        for &p in &cfg.p_grid {
            let sets: Vec<&ScatterSet> = result
                .scatters
                .iter()
                .filter(|s| s.p.to_bits() == p.to_bits())
                .collect();
            if sets.is_empty() {
                continue;
            }
            let scatter_path = cfg.output.join(format!("scatter_{p}.csv"));
            write_scatter_csv(&sets, &scatter_path)?;
            written.push(scatter_path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_config(dir: &Path, text: &str) -> PathBuf {
        let path = dir.join("experiment.conf");
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(text.as_bytes()).unwrap();
        path
    }

    #[test]
    fn config_parsing_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(
            dir.path(),
            "# comment line\n\
             dataset = er-small\n\
             graph = er:40:80:7\n\
             experiment = degree\n\
             p_grid = 0.2, 0.5\n\
             replicates = 3\n\
             seed = 99\n\
             iterations = 500\n\
             estimators = mme, bayes_true\n\
             output = out\n\
             scatter = false\n",
        );
        let cfg = ExperimentConfig::from_file(&path).unwrap();
        assert_eq!(cfg.dataset, "er-small");
        assert_eq!(
            cfg.source,
            GraphSource::ErdosRenyi {
                nodes: 40,
                edges: 80,
                seed: 7
            }
        );
        assert_eq!(cfg.kind, ExperimentKind::Degree);
        assert_eq!(cfg.p_grid, vec![0.2, 0.5]);
        assert_eq!(cfg.replicates, 3);
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.iterations, 500);
        assert_eq!(
            cfg.degree_methods,
            vec![DegreeMethod::Mme, DegreeMethod::BayesTrue]
        );
        assert_eq!(cfg.output, PathBuf::from("out"));
        assert!(!cfg.scatter);
    }

    #[test]
    fn config_defaults_fill_in() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(
            dir.path(),
            "dataset = d\ngraph = ba:100:3:1\nexperiment = triangles\n",
        );
        let cfg = ExperimentConfig::from_file(&path).unwrap();
        assert_eq!(cfg.p_grid, DEFAULT_P_GRID.to_vec());
        assert_eq!(cfg.replicates, 10);
        assert_eq!(cfg.iterations, 15_000);
        assert_eq!(cfg.triangle_methods, TriangleMethod::ALL.to_vec());
        assert!(cfg.scatter);
    }

    #[test]
    fn config_rejects_unknown_and_bad_keys() {
        let dir = tempfile::tempdir().unwrap();
        let bad = [
            "dataset = d\ngraph = er:10:5:1\nexperiment = degree\ntypo_key = 3\n",
            "dataset = d\ngraph = er:10:5:1\nexperiment = wedge\n",
            "dataset = d\ngraph = er:10:5:1\nexperiment = degree\np_grid = 0.0\n",
            "dataset = d\ngraph = hyperbolic:10:5:1\nexperiment = degree\n",
            "dataset = d\ngraph = er:10:5:1\n",
            "dataset = d\ngraph = er:10:5:1\nexperiment = degree\nreplicates = 0\n",
            "dataset = d\ngraph = er:10:5:1\nexperiment = degree\nseed = 1\nseed = 2\n",
            "dataset = d\ngraph = er:10:5:1\nexperiment = degree\nno equals sign\n",
        ];
        for text in bad {
            let path = write_config(dir.path(), text);
            assert!(
                ExperimentConfig::from_file(&path).is_err(),
                "accepted {text:?}"
            );
        }
    }

    #[test]
    fn graph_source_parse_accepts_file_paths_with_colons() {
        assert_eq!(
            GraphSource::parse("file:/tmp/a:b.edges").unwrap(),
            GraphSource::File(PathBuf::from("/tmp/a:b.edges"))
        );
        assert!(GraphSource::parse("er:10:5").is_err());
        assert!(GraphSource::parse("ba:x:5:1").is_err());
    }

    #[test]
    fn rmse_reference_values() {
        let est = |values: Vec<f64>| SequenceEstimate {
            kind: EstimateKind::Degree,
            method: "mme",
            values,
        };
        assert_eq!(rmse_degree(&[5.0], &est(vec![3.0])).unwrap(), 2.0);
        assert_eq!(rmse_degree(&[4.0, 2.0], &est(vec![4.0, 2.0])).unwrap(), 0.0);
        assert_eq!(rmse_degree(&[], &est(vec![])).unwrap(), 0.0);
        assert!(matches!(
            rmse_degree(&[1.0], &est(vec![1.0, 2.0])),
            Err(Error::LengthMismatch {
                truth: 1,
                estimates: 2
            })
        ));
        assert!(matches!(
            rmse_edge_triangles(&[1.0], &est(vec![1.0])),
            Err(Error::KindMismatch { .. })
        ));
    }

    fn tiny_degree_config(output: PathBuf) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(
            "tiny",
            GraphSource::ErdosRenyi {
                nodes: 30,
                edges: 60,
                seed: 5,
            },
            ExperimentKind::Degree,
        );
        cfg.p_grid = vec![0.5, 1.0];
        cfg.replicates = 3;
        cfg.seed = 11;
        cfg.iterations = 300;
        cfg.output = output;
        cfg
    }

    #[test]
    fn degree_experiment_is_deterministic_and_canonically_ordered() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_degree_config(dir.path().join("a"));
        let first = run_degree_experiment(&cfg).unwrap();
        let second = run_degree_experiment(&cfg).unwrap();
        assert_eq!(first, second);
        assert!(first.errors.is_empty());

        // Canonical order: p ascending as configured, replicate, estimator.
        let expected: Vec<(f64, u64, &str)> = cfg
            .p_grid
            .iter()
            .flat_map(|&p| {
                (0..cfg.replicates)
                    .flat_map(move |r| DegreeMethod::ALL.iter().map(move |m| (p, r, m.label())))
            })
            .collect();
        let got: Vec<(f64, u64, &str)> = first
            .rows
            .iter()
            .map(|r| (r.p, r.replicate, r.estimator))
            .collect();
        assert_eq!(got, expected);

        // Byte-identical CSV on rerun.
        let mut cfg_b = cfg.clone();
        cfg_b.output = dir.path().join("b");
        write_experiment_outputs(&cfg, &first).unwrap();
        write_experiment_outputs(&cfg_b, &second).unwrap();
        for name in [
            "results.csv",
            "summary.csv",
            "scatter_0.5.csv",
            "scatter_1.csv",
        ] {
            let a = fs::read(cfg.output.join(name)).unwrap();
            let b = fs::read(cfg_b.output.join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between reruns");
            assert!(!a.is_empty());
        }
        assert!(!cfg.output.join("errors.csv").exists());
    }

    #[test]
    fn full_retention_scores_zero_error_everywhere() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_degree_config(dir.path().join("out"));
        cfg.p_grid = vec![1.0];
        cfg.replicates = 2;
        let result = run_degree_experiment(&cfg).unwrap();
        assert!(result.errors.is_empty());
        for row in &result.rows {
            assert_eq!(row.value, 0.0, "{} not exact at p=1", row.estimator);
        }

        let mut cfg = cfg.clone();
        cfg.kind = ExperimentKind::Triangles;
        cfg.dataset = "tiny-tri".into();
        let result = run_triangle_experiment(&cfg).unwrap();
        assert!(result.errors.is_empty());
        for row in &result.rows {
            match row.metric {
                "rmse_edge_triangles" | "total_sq_error" => {
                    assert_eq!(row.value, 0.0, "{} {} at p=1", row.estimator, row.metric)
                }
                "total_estimate" => assert!(row.value >= 0.0),
                other => panic!("unexpected metric {other}"),
            }
        }
    }

    #[test]
    fn information_loss_is_monotone_in_p() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_degree_config(dir.path().join("out"));
        cfg.source = GraphSource::ErdosRenyi {
            nodes: 200,
            edges: 600,
            seed: 3,
        };
        cfg.p_grid = vec![0.2, 0.8];
        cfg.replicates = 5;
        cfg.degree_methods = vec![DegreeMethod::Mme];
        let result = run_degree_experiment(&cfg).unwrap();
        let summary = summarize(&result.rows);
        let mean_at = |p: f64| {
            summary
                .iter()
                .find(|s| s.p == p && s.metric == "rmse_degree")
                .unwrap()
                .mean
        };
        assert!(mean_at(0.8) < mean_at(0.2));
    }

    #[test]
    fn summary_means_match_row_means() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_degree_config(dir.path().join("out"));
        let result = run_degree_experiment(&cfg).unwrap();
        let summary = summarize(&result.rows);
        for s in &summary {
            let values: Vec<f64> = result
                .rows
                .iter()
                .filter(|r| r.p == s.p && r.estimator == s.estimator && r.metric == s.metric)
                .map(|r| r.value)
                .collect();
            assert_eq!(values.len() as u64, s.replicates);
            assert_eq!(s.replicates, cfg.replicates);
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            assert!((mean - s.mean).abs() < 1e-12);
        }
    }

    #[test]
    fn infeasible_cascade_is_recorded_not_fatal() {
        // 40 nodes but at most 15 retained edges: the cascade target
        // 2M'/p can never cover every node, so that estimator fails on
        // every replicate while MME still produces rows.
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_degree_config(dir.path().join("out"));
        cfg.source = GraphSource::ErdosRenyi {
            nodes: 40,
            edges: 15,
            seed: 2,
        };
        cfg.p_grid = vec![0.9];
        cfg.replicates = 2;
        cfg.degree_methods = vec![DegreeMethod::Mme, DegreeMethod::BayesCascade];
        let result = run_degree_experiment(&cfg).unwrap();
        assert_eq!(result.errors.len(), 2);
        for e in &result.errors {
            assert_eq!(e.estimator, "bayes_cascade");
            assert!(e.message.contains("degree-sum target"), "{}", e.message);
        }
        assert_eq!(result.rows.len(), 2);
        assert!(result.rows.iter().all(|r| r.estimator == "mme"));

        write_experiment_outputs(&cfg, &result).unwrap();
        let errors = fs::read_to_string(cfg.output.join("errors.csv")).unwrap();
        assert!(errors.lines().count() == 3);
        assert!(errors.starts_with("dataset,p,replicate,estimator,message"));
    }

    #[test]
    fn informed_prior_beats_moment_matching_when_data_is_thin() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_degree_config(dir.path().join("out"));
        cfg.source = GraphSource::ErdosRenyi {
            nodes: 300,
            edges: 3000,
            seed: 8,
        };
        cfg.p_grid = vec![0.1];
        cfg.replicates = 6;
        cfg.degree_methods = vec![DegreeMethod::Mme, DegreeMethod::BayesTrue];
        let result = run_degree_experiment(&cfg).unwrap();
        assert!(result.errors.is_empty());
        let summary = summarize(&result.rows);
        let mean_of = |label: &str| summary.iter().find(|s| s.estimator == label).unwrap().mean;
        assert!(mean_of("bayes_true") < mean_of("mme"));
    }

    #[test]
    fn scatter_export_writes_pairs_and_bare_header() {
        let dir = tempfile::tempdir().unwrap();
        let est = SequenceEstimate {
            kind: EstimateKind::Degree,
            method: "mme",
            values: vec![2.0, 4.0],
        };
        let path = dir.path().join("pairs.csv");
        scatter_export(&[2.0, 4.0], &est, &path).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            "truth,estimate\n2,2\n4,4\n"
        );

        let empty = SequenceEstimate {
            kind: EstimateKind::Degree,
            method: "mme",
            values: vec![],
        };
        let path = dir.path().join("empty.csv");
        scatter_export(&[], &empty, &path).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "truth,estimate\n");

        assert!(matches!(
            scatter_export(&[1.0], &empty, dir.path().join("bad.csv")),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn run_experiment_dispatches_on_kind() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_degree_config(dir.path().join("out"));
        cfg.kind = ExperimentKind::Triangles;
        cfg.p_grid = vec![0.6];
        cfg.replicates = 1;
        let result = run_experiment(&cfg).unwrap();
        assert!(result.rows.iter().all(|r| {
            matches!(
                r.metric,
                "rmse_edge_triangles" | "total_estimate" | "total_sq_error"
            )
        }));
        let labels: Vec<&str> = result.rows.iter().map(|r| r.estimator).collect();
        assert!(labels.contains(&"bayes_poisson"));
    }
}
