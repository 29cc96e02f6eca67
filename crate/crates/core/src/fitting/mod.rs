//! Maximum-likelihood Dirichlet and Beta fits to observed confidence vectors,
//! CSV ingestion, and synthetic data generation.

mod ingest;
mod mle;

use serde::Serialize;
use thiserror::Error;

pub use ingest::{ingest_csv, read_confidence_csv, DEFAULT_CLAMP, SUM_TOLERANCE};
pub use mle::{fit_beta_tlc, fit_dirichlet, FitResult, DEFAULT_MAX_ITER, DEFAULT_TOL};

use crate::numerics::{DirichletSampler, NumericsError, RngStream};
use crate::sim::Hypothesis;
use crate::uncertainty::DirichletPair;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Line { line: u64, message: String },
    #[error("need at least {needed} rows to fit {k} classes, got {rows}")]
    TooFewRows { rows: usize, k: usize, needed: usize },
    #[error("row {row}: component {col} is {value}; fitting needs strictly positive data (clamp first)")]
    NonPositive { row: usize, col: usize, value: f64 },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Probability vectors from one model family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfidenceDataset {
    pub k: usize,
    pub rows: Vec<Vec<f64>>,
    pub label: Option<Hypothesis>,
    pub source: String,
    /// Input lines whose values were clamped or renormalized on ingestion.
    pub adjusted_lines: Vec<u64>,
}

impl ConfidenceDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Sample mean of each component.
    pub fn component_means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.k];
        for row in &self.rows {
            for (acc, x) in m.iter_mut().zip(row) {
                *acc += x;
            }
        }
        let n = self.rows.len() as f64;
        m.iter_mut().for_each(|x| *x /= n);
        m
    }
}

/// Draws `n` confidence vectors from the `hypothesis` side of `pair`.
pub fn generate_dataset(
    pair: &DirichletPair,
    hypothesis: Hypothesis,
    n: usize,
    rng: &RngStream,
) -> Result<ConfidenceDataset, FitError> {
    if n == 0 {
        return Err(FitError::Invalid("dataset size must be at least 1".into()));
    }
    let gamma = match hypothesis {
        Hypothesis::Out => pair.gamma_out(),
        Hypothesis::In => pair.gamma_in(),
    };
    let sampler = DirichletSampler::new(gamma)?;
    let mut stream = rng.clone();
    let rows = (0..n).map(|_| sampler.sample(&mut stream)).collect();
    Ok(ConfidenceDataset {
        k: pair.k(),
        rows,
        label: Some(hypothesis),
        source: format!("synthetic:{hypothesis}:seed={}:stream={}", rng.seed(), rng.stream_id()),
        adjusted_lines: Vec::new(),
    })
}
