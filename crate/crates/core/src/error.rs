use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("point set is degenerate (all points collinear)")]
    DegenerateInput,
    #[error("invalid ellipse axes r1 = {r1}, r2 = {r2} (need r1 >= r2 > 0)")]
    InvalidEllipse { r1: f64, r2: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JohnError {
    #[error("angle tuple must have 3 to 5 entries, got {0}")]
    BadArity(usize),
    #[error("expected a {expected}-tuple, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("angles must satisfy 0 <= a1 < a2 < ... < ak < 2π: {0:?}")]
    NotOrdered(Vec<f64>),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error("region query needs at least one point")]
    EmptyZ,
    #[error("inflation must be finite and non-negative, got {0}")]
    BadEpsilon(f64),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid campaign configuration: {0}")]
    Config(String),
    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },
    #[error("checkpoint config hash {found} does not match campaign hash {expected}")]
    CheckpointMismatch { expected: String, found: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertificateError {
    #[error("config hash {found} does not match recomputed {expected}")]
    HashMismatch { expected: String, found: String },
    #[error("certificate inconsistent: {0}")]
    Inconsistent(String),
    #[error("unsupported schema version {0}")]
    Schema(u32),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertifyError {
    #[error("inconsistent inputs: {0}")]
    InconsistentInputs(String),
    #[error("lower-bound witness failed: {0}")]
    WitnessFailed(String),
}
