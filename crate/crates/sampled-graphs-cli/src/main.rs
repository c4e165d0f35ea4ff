//! `sgraph`: edge-sample graphs, reconstruct degree and triangle statistics,
//! and run seeded sweep experiments. Every subcommand reads whitespace
//! edge-list files and writes CSV.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use sampled_graphs::estimators::{self, SequenceEstimate};
use sampled_graphs::priors::{
    link_cascade_prior, minimisation_prior, poisson_triangle_prior, true_prior_degree,
    true_prior_triangles, DiscretePrior,
};
use sampled_graphs::theory::{
    self, empirical_removed_nodes, empirical_sampled_triangles, MomentReport, SampledQuantity,
};
use sampled_graphs::{
    edge_sample, edge_triangle_counts, graph_stats, run_experiment, write_experiment_outputs,
    ExperimentConfig, Graph, SampledGraph,
};

#[derive(Parser)]
#[command(
    name = "sgraph",
    version,
    about = "Edge-sample graphs and reconstruct degree and triangle statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print summary statistics of an edge-list file as one CSV row.
    Stats { file: PathBuf },
    /// Keep each edge with probability p and drop nodes left bare.
    ///
    /// The output is an edge list preceded by a `# p=<p> removed_nodes=<n>`
    /// comment, so it can be fed back to the other subcommands unchanged.
    Sample {
        file: PathBuf,
        /// Edge retention probability in (0, 1].
        #[arg(long)]
        p: f64,
        #[arg(long)]
        seed: u64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate per-node degrees or per-edge triangle counts of the parent
    /// graph from a sampled edge list; prints item_id,observed,estimate.
    Estimate(EstimateArgs),
    /// Build a prior from a sampled edge list and print it as
    /// value,probability CSV.
    Prior(PriorArgs),
    /// Print closed-form moments of the sampled removed-node and triangle
    /// counts, optionally next to Monte Carlo moments.
    Theory {
        file: PathBuf,
        /// Edge retention probability in (0, 1].
        #[arg(long)]
        p: f64,
        /// Also estimate the moments over this many sampling replicates.
        #[arg(long)]
        replicates: Option<u64>,
        /// Seed for the replicates.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a sweep experiment described by a `key = value` config file.
    ///
    /// Writes results.csv, summary.csv and optional scatter files to the
    /// configured output directory. Exits 0 on full success and 2 when some
    /// rows failed (the failures land in errors.csv).
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Mme,
    Bayes,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Quantity {
    /// Per-node degree.
    Degree,
    /// Per-edge triangle count.
    EdgeTriangles,
}

#[derive(Args)]
struct EstimateArgs {
    /// Sampled edge-list file, as written by `sgraph sample`.
    file: PathBuf,
    /// Edge retention probability the sample was drawn with.
    #[arg(long)]
    p: f64,
    #[arg(long, value_enum)]
    method: Method,
    /// Prior for the Bayes method: `true:<file>` loads a value,probability
    /// CSV (as printed by `sgraph prior`), while `min`, `cascade` and
    /// `poisson` build one from the sample itself.
    #[arg(long)]
    prior: Option<String>,
    #[arg(long, value_enum, default_value_t = Quantity::Degree)]
    quantity: Quantity,
    /// Parent node count; required by the cascade prior.
    #[arg(long)]
    n_original: Option<usize>,
    /// Local-search iterations for the minimisation prior.
    #[arg(long, default_value_t = 15_000)]
    iterations: usize,
    /// Seed for randomized prior construction.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PriorMethod {
    /// Minimise the rescaled squared degree error under a fixed degree sum.
    Min,
    /// Spread degree over placeholder nodes until none is left at zero.
    Cascade,
    /// Poisson prior keyed to the estimated triangles-per-edge rate.
    Poisson,
    /// Empirical distribution of a reference graph.
    True,
}

#[derive(Args)]
struct PriorArgs {
    /// Sampled edge-list file, as written by `sgraph sample`.
    file: PathBuf,
    /// Edge retention probability the sample was drawn with.
    #[arg(long)]
    p: f64,
    #[arg(long, value_enum)]
    method: PriorMethod,
    /// Which empirical distribution the `true` method reads off the
    /// reference graph; the other methods fix their own quantity.
    #[arg(long, value_enum, default_value_t = Quantity::Degree)]
    quantity: Quantity,
    /// Parent node count; required by the cascade method.
    #[arg(long)]
    n_original: Option<usize>,
    /// Local-search iterations for the minimisation method.
    #[arg(long, default_value_t = 15_000)]
    iterations: usize,
    /// Reference graph for the `true` method.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Seed for the randomized methods.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            // A closed stdout (`sgraph ... | head`) is not an error worth
            // reporting.
            if let Some(io) = e.root_cause().downcast_ref::<io::Error>() {
                if io.kind() == io::ErrorKind::BrokenPipe {
                    std::process::exit(0);
                }
            }
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Stats { file } => stats(&file)?,
        Command::Sample { file, p, seed, out } => sample(&file, p, seed, out.as_deref())?,
        Command::Estimate(args) => estimate(&args)?,
        Command::Prior(args) => prior(&args)?,
        Command::Theory {
            file,
            p,
            replicates,
            seed,
        } => theory_report(&file, p, replicates, seed)?,
        Command::Experiment { config } => return experiment(&config),
    }
    Ok(0)
}

fn read_graph(path: &std::path::Path) -> Result<Graph> {
    Graph::read_edge_list(path).with_context(|| format!("reading {}", path.display()))
}

fn stats(file: &std::path::Path) -> Result<()> {
    let s = graph_stats(&read_graph(file)?);
    let mut w = io::stdout().lock();
    writeln!(
        w,
        "nodes,edges,max_degree,triangles,mean_clustering,mean_edge_triangles,\
         assortativity,assortativity_degenerate"
    )?;
    writeln!(
        w,
        "{},{},{},{},{},{},{},{}",
        s.nodes,
        s.edges,
        s.max_degree,
        s.triangles,
        s.mean_clustering,
        s.mean_edge_triangles,
        s.assortativity,
        s.assortativity_degenerate
    )?;
    Ok(())
}

fn sample(file: &std::path::Path, p: f64, seed: u64, out: Option<&std::path::Path>) -> Result<()> {
    let parent = read_graph(file)?;
    let s = edge_sample(&parent, p, seed)?;
    let mut w: Box<dyn Write> = match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    writeln!(w, "# p={p} removed_nodes={}", s.removed_nodes())?;
    s.graph().write_edges(&mut w)?;
    w.flush()?;
    Ok(())
}

fn estimate(args: &EstimateArgs) -> Result<()> {
    let s = SampledGraph::from_observed(read_graph(&args.file)?, args.p)?;
    if args.method == Method::Mme && args.prior.is_some() {
        bail!("--prior only applies to --method bayes");
    }
    let est: SequenceEstimate = match (args.method, args.quantity) {
        (Method::Mme, Quantity::Degree) => estimators::mme_degree(&s),
        (Method::Mme, Quantity::EdgeTriangles) => estimators::mme_edge_triangles(&s),
        (Method::Bayes, quantity) => {
            let prior = estimate_prior(&s, args, quantity)?;
            match quantity {
                Quantity::Degree => estimators::bayes_degree(&s, &prior)?,
                Quantity::EdgeTriangles => estimators::bayes_edge_triangles(&s, &prior)?,
            }
        }
    };
    let g = s.graph();
    let (labels, observed): (Vec<String>, Vec<u64>) = match args.quantity {
        Quantity::Degree => (
            g.labels().map(str::to_string).collect(),
            g.degrees().iter().map(|&k| k as u64).collect(),
        ),
        Quantity::EdgeTriangles => (
            g.edges()
                .iter()
                .map(|&(a, b)| format!("{}-{}", g.label(a), g.label(b)))
                .collect(),
            edge_triangle_counts(g).per_edge().to_vec(),
        ),
    };
    let mut w = io::stdout().lock();
    writeln!(w, "item_id,observed,estimate")?;
    for ((label, obs), value) in labels.iter().zip(&observed).zip(&est.values) {
        writeln!(w, "{label},{obs},{value}")?;
    }
    Ok(())
}

fn estimate_prior(
    s: &SampledGraph,
    args: &EstimateArgs,
    quantity: Quantity,
) -> Result<DiscretePrior> {
    let spec = args
        .prior
        .as_deref()
        .context("--prior is required for --method bayes")?;
    if let Some(path) = spec.strip_prefix("true:") {
        let file = File::open(path).with_context(|| format!("opening prior file {path}"))?;
        return DiscretePrior::read_csv(file).with_context(|| format!("parsing prior file {path}"));
    }
    match (spec, quantity) {
        ("min", Quantity::Degree) => Ok(minimisation_prior(s, args.iterations, args.seed)?.prior),
        ("cascade", Quantity::Degree) => {
            let n = args
                .n_original
                .context("--n-original is required for the cascade prior")?;
            Ok(link_cascade_prior(s, n, args.seed)?.prior)
        }
        ("poisson", Quantity::EdgeTriangles) => Ok(poisson_triangle_prior(s)?),
        ("min" | "cascade", Quantity::EdgeTriangles) => {
            bail!("{spec} builds a degree prior; use --quantity degree")
        }
        ("poisson", Quantity::Degree) => {
            bail!("poisson builds a triangle prior; use --quantity edge-triangles")
        }
        _ => bail!("unknown prior {spec:?}: expected true:<file>, min, cascade or poisson"),
    }
}

fn prior(args: &PriorArgs) -> Result<()> {
    let built = match args.method {
        PriorMethod::Min => {
            let s = SampledGraph::from_observed(read_graph(&args.file)?, args.p)?;
            minimisation_prior(&s, args.iterations, args.seed)?.prior
        }
        PriorMethod::Cascade => {
            let s = SampledGraph::from_observed(read_graph(&args.file)?, args.p)?;
            let n = args
                .n_original
                .context("--n-original is required for --method cascade")?;
            link_cascade_prior(&s, n, args.seed)?.prior
        }
        PriorMethod::Poisson => {
            let s = SampledGraph::from_observed(read_graph(&args.file)?, args.p)?;
            poisson_triangle_prior(&s)?
        }
        PriorMethod::True => {
            let path = args
                .reference
                .as_deref()
                .context("--reference is required for --method true")?;
            let reference = read_graph(path)?;
            match args.quantity {
                Quantity::Degree => true_prior_degree(&reference)?,
                Quantity::EdgeTriangles => true_prior_triangles(&reference)?,
            }
        }
    };
    built.write_csv(io::stdout().lock())?;
    Ok(())
}

fn theory_report(file: &std::path::Path, p: f64, replicates: Option<u64>, seed: u64) -> Result<()> {
    let g = read_graph(file)?;
    let total = edge_triangle_counts(&g).total();
    let mut removed = MomentReport {
        quantity: SampledQuantity::RemovedNodes.label(),
        mean: theory::expected_removed_nodes(&g, p),
        variance: theory::variance_removed_nodes(&g, p),
        empirical: None,
    };
    let mut triangles = MomentReport {
        quantity: SampledQuantity::TotalTriangles.label(),
        mean: theory::expected_sampled_triangles(total, p),
        variance: theory::variance_total_triangles(&g, p),
        empirical: None,
    };
    if let Some(r) = replicates {
        removed.empirical = Some(empirical_removed_nodes(&g, p, r, seed)?);
        triangles.empirical = Some(empirical_sampled_triangles(&g, p, r, seed)?);
    }
    let mut w = io::stdout().lock();
    writeln!(w, "{}", MomentReport::CSV_HEADER)?;
    writeln!(w, "{}", removed.csv_row())?;
    writeln!(w, "{}", triangles.csv_row())?;
    Ok(())
}

fn experiment(config: &std::path::Path) -> Result<i32> {
    let cfg = ExperimentConfig::from_file(config)?;
    let result = run_experiment(&cfg)?;
    let written = write_experiment_outputs(&cfg, &result)?;
    for path in &written {
        eprintln!("wrote {}", path.display());
    }
    if result.errors.is_empty() {
        Ok(0)
    } else {
        eprintln!(
            "{} result rows, {} row-level failures (see errors.csv)",
            result.rows.len(),
            result.errors.len()
        );
        Ok(2)
    }
}
