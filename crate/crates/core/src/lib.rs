//! Membership-inference leakage under Dirichlet models of classifier
//! outputs.
//!
//! A target example's confidence vector is modelled as Dirichlet under both
//! hypotheses ("out": the example was not in the training set, "in": it
//! was), parameterized by calibration error Δ, aleatoric uncertainty ε_a and
//! epistemic uncertainty ε_e. The crate provides:
//!
//! - [`uncertainty`]: the mapping from (Δ, ε_a, ε_e) to the Dirichlet pair
//!   and back;
//! - [`bounds`]: closed-form advantage bounds for full confidence-vector
//!   (CV), true-label confidence (TLC) and decision-set (DS) disclosure;
//! - [`sim`]: Monte Carlo trade-off curves of the likelihood-ratio attack;
//! - [`fitting`]: Dirichlet/Beta maximum-likelihood fits to observed outputs.

// `!(x > 0.0)` is used deliberately so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod curve;
pub mod exec;
pub mod fitting;
pub mod numerics;
pub mod sim;
pub mod uncertainty;

pub use bounds::{AdvantageBounds, BoundsError, DivergencePair};
pub use curve::{CurveError, CurvePoint, CurveSource, TradeoffCurve};
pub use fitting::{ConfidenceDataset, FitError, FitResult};
pub use numerics::{NumericsError, RngStream};
pub use sim::{DisclosureMode, Hypothesis, SimError};
pub use uncertainty::{DirichletPair, UncertaintyProfile, ValidationError};
