use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: expected two whitespace-separated labels, got {content:?}")]
    EdgeListParse {
        path: PathBuf,
        line: usize,
        content: String,
    },

    #[error("node id {id} out of range for {nodes} nodes")]
    NodeOutOfRange { id: usize, nodes: usize },

    #[error(
        "{requested} edges requested but only {capacity} distinct pairs exist on {nodes} nodes"
    )]
    EdgeCapacity {
        requested: usize,
        capacity: u64,
        nodes: usize,
    },

    #[error("invalid generator parameters: {reason}")]
    GeneratorParams { reason: String },

    #[error("retention probability must lie in (0, 1], got {value}")]
    InvalidProbability { value: f64 },

    #[error("invalid prior: {reason}")]
    InvalidPrior { reason: String },

    #[error("prior construction failed: {reason}")]
    PriorConstruction { reason: String },

    #[error(
        "posterior for {kind} of {item} has zero mass: observed {observed}, \
         prior support ends at {support_max}"
    )]
    ZeroPosteriorMass {
        kind: &'static str,
        item: String,
        observed: u64,
        support_max: u64,
    },

    #[error("degree histogram is empty or has zero mean degree")]
    DegenerateHistogram,

    #[error("exhaustive enumeration supports at most {max} edges, graph has {edges}")]
    EnumerationTooLarge { edges: usize, max: usize },

    #[error("length mismatch: {truth} truth values vs {estimates} estimates")]
    LengthMismatch { truth: usize, estimates: usize },

    #[error("estimate kind mismatch: expected {expected}, got {actual}")]
    KindMismatch {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("config {path}:{line}: {reason}")]
    ConfigParse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("config {path}: {reason}")]
    ConfigInvalid { path: PathBuf, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
