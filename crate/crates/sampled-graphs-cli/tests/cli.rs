//! End-to-end checks of the `sgraph` binary: every subcommand, the sidecar
//! comment format, determinism of seeded outputs, and the exit-code contract
//! of `experiment`.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn sgraph(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgraph"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawning sgraph")
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Triangle a-b-c plus a pendant edge a-d.
fn toy_graph(dir: &Path) -> String {
    fs::write(dir.join("toy.txt"), "a b\nb c\nc a\na d\n").unwrap();
    "toy.txt".into()
}

fn k4_graph(dir: &Path) -> String {
    fs::write(dir.join("k4.txt"), "0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n").unwrap();
    "k4.txt".into()
}

#[test]
fn stats_prints_header_and_one_row() {
    let dir = TempDir::new().unwrap();
    let file = toy_graph(dir.path());
    let out = stdout_of(&sgraph(dir.path(), &["stats", &file]));
    assert_eq!(
        out,
        "nodes,edges,max_degree,triangles,mean_clustering,mean_edge_triangles,\
         assortativity,assortativity_degenerate\n\
         4,4,3,1,0.5833333333333333,0.75,-0.7142857142857143,false\n"
    );
}

#[test]
fn stats_reports_missing_file() {
    let dir = TempDir::new().unwrap();
    let out = sgraph(dir.path(), &["stats", "nope.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("nope.txt"));
}

#[test]
fn sample_is_deterministic_and_feeds_back_into_estimate() {
    let dir = TempDir::new().unwrap();
    let file = toy_graph(dir.path());
    let args = ["sample", file.as_str(), "--p", "0.35", "--seed", "9"];
    let first = stdout_of(&sgraph(dir.path(), &args));
    let second = stdout_of(&sgraph(dir.path(), &args));
    assert_eq!(first, second);
    assert!(first.starts_with("# p=0.35 removed_nodes="));

    let out_path = dir.path().join("sampled.txt");
    let with_out = sgraph(
        dir.path(),
        &[
            "sample",
            &file,
            "--p",
            "0.35",
            "--seed",
            "9",
            "--out",
            out_path.to_str().unwrap(),
        ],
    );
    assert!(with_out.status.success());
    assert_eq!(fs::read_to_string(&out_path).unwrap(), first);

    // The sidecar comment must not break downstream consumers.
    let est = stdout_of(&sgraph(
        dir.path(),
        &["estimate", "sampled.txt", "--p", "0.35", "--method", "mme"],
    ));
    assert!(est.starts_with("item_id,observed,estimate\n"));
}

#[test]
fn full_retention_sample_keeps_every_edge() {
    let dir = TempDir::new().unwrap();
    let file = k4_graph(dir.path());
    let out = stdout_of(&sgraph(
        dir.path(),
        &["sample", &file, "--p", "1.0", "--seed", "3"],
    ));
    assert_eq!(out, "# p=1 removed_nodes=0\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n");
}

#[test]
fn estimate_mme_divides_observations_by_p() {
    let dir = TempDir::new().unwrap();
    let file = k4_graph(dir.path());
    let out = stdout_of(&sgraph(
        dir.path(),
        &["estimate", &file, "--p", "0.5", "--method", "mme"],
    ));
    assert_eq!(
        out,
        "item_id,observed,estimate\n0,3,6\n1,3,6\n2,3,6\n3,3,6\n"
    );
    let tri = stdout_of(&sgraph(
        dir.path(),
        &[
            "estimate",
            &file,
            "--p",
            "0.5",
            "--method",
            "mme",
            "--quantity",
            "edge-triangles",
        ],
    ));
    assert_eq!(
        tri,
        "item_id,observed,estimate\n0-1,2,8\n0-2,2,8\n0-3,2,8\n1-2,2,8\n1-3,2,8\n2-3,2,8\n"
    );
}

#[test]
fn estimate_bayes_accepts_serialized_prior() {
    let dir = TempDir::new().unwrap();
    let file = k4_graph(dir.path());
    fs::write(dir.path().join("prior.csv"), "value,probability\n8,1\n").unwrap();
    let out = stdout_of(&sgraph(
        dir.path(),
        &[
            "estimate",
            &file,
            "--p",
            "0.5",
            "--method",
            "bayes",
            "--prior",
            "true:prior.csv",
        ],
    ));
    // Point-mass prior: every posterior mean is the mass point.
    assert_eq!(
        out,
        "item_id,observed,estimate\n0,3,8\n1,3,8\n2,3,8\n3,3,8\n"
    );
}

#[test]
fn estimate_validates_prior_flags() {
    let dir = TempDir::new().unwrap();
    let file = k4_graph(dir.path());
    let missing = sgraph(
        dir.path(),
        &["estimate", &file, "--p", "0.5", "--method", "bayes"],
    );
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr_of(&missing).contains("--prior is required"));

    let mismatch = sgraph(
        dir.path(),
        &[
            "estimate", &file, "--p", "0.5", "--method", "bayes", "--prior", "poisson",
        ],
    );
    assert_eq!(mismatch.status.code(), Some(1));
    assert!(stderr_of(&mismatch).contains("triangle prior"));

    let unknown = sgraph(
        dir.path(),
        &[
            "estimate", &file, "--p", "0.5", "--method", "bayes", "--prior", "bogus",
        ],
    );
    assert_eq!(unknown.status.code(), Some(1));
    assert!(stderr_of(&unknown).contains("unknown prior"));

    let mme_with_prior = sgraph(
        dir.path(),
        &[
            "estimate", &file, "--p", "0.5", "--method", "mme", "--prior", "min",
        ],
    );
    assert_eq!(mme_with_prior.status.code(), Some(1));
    assert!(stderr_of(&mme_with_prior).contains("--method bayes"));
}

#[test]
fn prior_true_method_reads_reference_graph() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("k3.txt"), "x y\ny z\nz x\n").unwrap();
    let file = toy_graph(dir.path());
    let degree = stdout_of(&sgraph(
        dir.path(),
        &[
            "prior",
            &file,
            "--p",
            "0.5",
            "--method",
            "true",
            "--reference",
            "k3.txt",
        ],
    ));
    assert_eq!(degree, "value,probability\n2,1\n");
    let triangles = stdout_of(&sgraph(
        dir.path(),
        &[
            "prior",
            &file,
            "--p",
            "0.5",
            "--method",
            "true",
            "--reference",
            "k3.txt",
            "--quantity",
            "edge-triangles",
        ],
    ));
    assert_eq!(triangles, "value,probability\n1,1\n");
}

#[test]
fn prior_min_is_a_seeded_pmf() {
    let dir = TempDir::new().unwrap();
    let file = k4_graph(dir.path());
    let args = [
        "prior",
        file.as_str(),
        "--p",
        "0.5",
        "--method",
        "min",
        "--iterations",
        "200",
        "--seed",
        "4",
    ];
    let first = stdout_of(&sgraph(dir.path(), &args));
    assert_eq!(first, stdout_of(&sgraph(dir.path(), &args)));
    let mut total = 0.0;
    for line in first.lines().skip(1) {
        let (_, mass) = line.split_once(',').unwrap();
        total += mass.parse::<f64>().unwrap();
    }
    assert!((total - 1.0).abs() < 1e-12, "pmf total {total}");
}

#[test]
fn prior_cascade_and_true_report_missing_flags() {
    let dir = TempDir::new().unwrap();
    let file = k4_graph(dir.path());
    let cascade = sgraph(
        dir.path(),
        &["prior", &file, "--p", "0.5", "--method", "cascade"],
    );
    assert_eq!(cascade.status.code(), Some(1));
    assert!(stderr_of(&cascade).contains("--n-original"));
    let truth = sgraph(
        dir.path(),
        &["prior", &file, "--p", "0.5", "--method", "true"],
    );
    assert_eq!(truth.status.code(), Some(1));
    assert!(stderr_of(&truth).contains("--reference"));
}

#[test]
fn theory_prints_closed_form_rows() {
    let dir = TempDir::new().unwrap();
    let file = toy_graph(dir.path());
    let out = stdout_of(&sgraph(dir.path(), &["theory", &file, "--p", "0.5"]));
    assert_eq!(
        out,
        "quantity,mean,variance,empirical_mean,empirical_variance,replicates\n\
         removed_nodes,1.125,1.109375,,,\n\
         total_triangles,0.125,0.109375,,,\n"
    );
    let with_mc = stdout_of(&sgraph(
        dir.path(),
        &[
            "theory",
            &file,
            "--p",
            "0.5",
            "--replicates",
            "64",
            "--seed",
            "2",
        ],
    ));
    for line in with_mc.lines().skip(1) {
        assert!(line.ends_with(",64"), "{line}");
        assert_eq!(line.split(',').count(), 6);
    }
}

#[test]
fn experiment_writes_csvs_and_exits_zero() {
    let dir = TempDir::new().unwrap();
    let config = "dataset = demo\n\
                  graph = er:30:60:5\n\
                  experiment = degree\n\
                  p_grid = 0.5\n\
                  replicates = 2\n\
                  seed = 3\n\
                  iterations = 200\n\
                  estimators = mme,bayes_true\n\
                  output = out\n\
                  scatter = false\n";
    fs::write(dir.path().join("exp.cfg"), config).unwrap();
    let first = sgraph(dir.path(), &["experiment", "--config", "exp.cfg"]);
    assert_eq!(
        first.status.code(),
        Some(0),
        "stderr: {}",
        stderr_of(&first)
    );
    let results = fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
    assert!(results.starts_with("dataset,p,replicate,estimator,metric,value\n"));
    assert_eq!(results.lines().count(), 1 + 2 * 2);
    let summary = fs::read_to_string(dir.path().join("out/summary.csv")).unwrap();
    assert!(summary.starts_with("dataset,p,estimator,metric,mean,sd,replicates\n"));
    assert!(!dir.path().join("out/errors.csv").exists());

    // Byte-for-byte reproducible.
    fs::write(
        dir.path().join("exp2.cfg"),
        config.replace("output = out", "output = out2"),
    )
    .unwrap();
    let second = sgraph(dir.path(), &["experiment", "--config", "exp2.cfg"]);
    assert_eq!(second.status.code(), Some(0));
    let rerun = fs::read_to_string(dir.path().join("out2/results.csv")).unwrap();
    assert_eq!(results, rerun);
}

#[test]
fn experiment_with_failing_rows_exits_two() {
    let dir = TempDir::new().unwrap();
    // 40 parent nodes but at most 15 surviving edges: the cascade degree-sum
    // target floor(2 M' / p) <= 33 can never cover the parent, so every
    // bayes_cascade row fails regardless of the seed.
    let config = "dataset = thin\n\
                  graph = er:40:15:3\n\
                  experiment = degree\n\
                  p_grid = 0.9\n\
                  replicates = 1\n\
                  seed = 7\n\
                  iterations = 100\n\
                  estimators = mme,bayes_cascade\n\
                  output = out\n\
                  scatter = false\n";
    fs::write(dir.path().join("exp.cfg"), config).unwrap();
    let out = sgraph(dir.path(), &["experiment", "--config", "exp.cfg"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("row-level failures"));
    let errors = fs::read_to_string(dir.path().join("out/errors.csv")).unwrap();
    assert!(errors.starts_with("dataset,p,replicate,estimator,message\n"));
    assert!(errors.lines().count() > 1);
    // The feasible estimator still produced its rows.
    let results = fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
    assert!(results.contains(",mme,"));
}

#[test]
fn experiment_rejects_bad_config() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.cfg"), "dataset = x\nmystery = 1\n").unwrap();
    let out = sgraph(dir.path(), &["experiment", "--config", "bad.cfg"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("mystery"));
}
