//! Monte Carlo realization of the likelihood-ratio membership test under the
//! three disclosure modes.
//!
//! Every Monte Carlo estimate is computed in [`BATCHES`] independent batches,
//! one derived random stream per (batch, hypothesis) task. Batches give the
//! standard errors and make results independent of thread scheduling.

mod ds;
mod llr;
mod roc;
mod setsize;
mod simulate;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ds::{ds_pmfs, exact_roc, DsPmfPair};
pub use llr::{llr_cv, llr_tlc, LOG_FLOOR};
pub use setsize::{expected_set_size, SetSize};
pub use simulate::{simulate_modes, simulate_tradeoff};

use crate::bounds::BoundsError;
use crate::curve::CurveError;
use crate::numerics::NumericsError;

/// Number of independent batches behind every Monte Carlo estimate.
pub const BATCHES: usize = 16;
/// Smallest sample count accepted for CV/TLC curves.
pub const MIN_SAMPLES: usize = 100_000;
/// Smallest Monte Carlo count accepted for decision-set pmfs and set sizes.
pub const MIN_MC: usize = 10_000;

/// What the deployed model reveals for a queried example.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "lowercase")]
pub enum DisclosureMode {
    /// The full confidence vector.
    Cv,
    /// Only the confidence of the true label.
    Tlc,
    /// The set of labels whose confidence passes a (possibly randomized)
    /// threshold `q`; `temperature = 0` is the deterministic threshold.
    Ds { q: f64, temperature: f64 },
}

impl DisclosureMode {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Cv => "cv",
            Self::Tlc => "tlc",
            Self::Ds { .. } => "ds",
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if let Self::Ds { q, temperature } = *self {
            if !(0.0..=1.0).contains(&q) {
                return Err(SimError::Invalid(format!("DS threshold q={q} must lie in [0, 1]")));
            }
            if !(temperature >= 0.0) {
                return Err(SimError::Invalid(format!(
                    "DS temperature T={temperature} must be ≥ 0"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for DisclosureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ds { q, temperature } => write!(f, "ds(q={q},T={temperature})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Whether the target example was excluded from (`Out`) or included in
/// (`In`) the training set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    Out,
    In,
}

impl Hypothesis {
    pub(crate) fn index(self) -> usize {
        match self {
            Self::Out => 0,
            Self::In => 1,
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Out => "out",
            Self::In => "in",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Splits `n` into `BATCHES` near-equal counts.
pub(crate) fn batch_sizes(n: usize) -> [usize; BATCHES] {
    let mut out = [n / BATCHES; BATCHES];
    for slot in out.iter_mut().take(n % BATCHES) {
        *slot += 1;
    }
    out
}

pub(crate) fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
