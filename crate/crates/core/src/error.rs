use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A row that failed validation while loading a table.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RowError {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("{} malformed row(s), first at line {}: {}", .0.len(), .0[0].line, .0[0].reason)]
    Rows(Vec<RowError>),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix has a negative entry at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize },
    #[error("no term survives the document-frequency thresholds")]
    EmptyVocabulary,
    #[error("nu = {nu} is infeasible for {l} training points (nu * l must be >= 1)")]
    InfeasibleNu { nu: f64, l: usize },
    #[error("design matrix is rank deficient; collinear columns {0:?}")]
    RankDeficient(Vec<usize>),
    #[error("all paired differences are equal; variance is zero")]
    DegenerateVariance,
    #[error("input is constant; correlation undefined")]
    ConstantInput,
    #[error("only one class present")]
    SingleClass,
    #[error("degrees of freedom must be positive, got {0}")]
    InvalidDf(f64),
    #[error("unknown probe grant `{0}`")]
    UnknownProbe(String),
    #[error("insufficient history: {found} past grants, {required} required")]
    InsufficientHistory { found: usize, required: usize },
    #[error("solver did not converge after {iterations} iterations (violation {violation:e})")]
    NonConvergence { iterations: usize, violation: f64 },
    #[error("labeling oracle failed: {0}")]
    Oracle(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
