//! Analytical results: Dirichlet KL divergences, the Pinsker-type advantage
//! ceiling, the β lower-bound curve, the per-mode advantage bounds and the
//! thresholding contraction factor.

mod advantage;
mod delta;
mod kl;
mod lower_bound;

use thiserror::Error;

pub use advantage::{
    advantage_ub, cv_advantage_ub, ds_advantage_ub, pair_advantage_ub, tlc_advantage_ub,
    AdvantageBounds, ROUTE_REL_TOL,
};
pub use delta::{delta_factor, tv_product_bernoulli, DeltaFactor, ThresholdChannel, MAX_ENUM_CLASSES};
pub use kl::{dirichlet_kl, pinsker_advantage_ub, DivergencePair};
pub use lower_bound::{beta_lb_curve, beta_lower_bound};

use crate::curve::CurveError;
use crate::numerics::NumericsError;
use crate::uncertainty::ValidationError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("length mismatch: {left} vs {right}")]
    Length { left: usize, right: usize },
    #[error("α={0} must lie strictly inside (0, 1)")]
    Alpha(f64),
    #[error("invalid α grid: {0}")]
    Grid(String),
    #[error("invalid threshold channel: {0}")]
    Threshold(String),
    #[error("K={k} exceeds the exact-enumeration limit of {max}; use Monte Carlo estimation instead")]
    TooManyClasses { k: usize, max: usize },
    #[error("bound routes disagree: digamma form {formula} vs KL composition {composed}")]
    RouteMismatch { formula: f64, composed: f64 },
}
