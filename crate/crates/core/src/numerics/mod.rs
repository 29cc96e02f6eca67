//! Special functions, root finding and random sampling.

mod rng;
mod root;
mod sampling;
mod special;

pub use rng::{derive_stream_id, RngStream};
pub use root::{bisect, bisect_bracket, MAX_BISECT_ITERATIONS};
pub use sampling::{sample_dirichlet, sample_gamma, DirichletSampler, GammaSampler};
pub use special::{
    binary_kl, digamma, digamma_inverse, log_gamma, log_multivariate_beta, trigamma, EULER_GAMMA,
};
pub(crate) use special::digamma_unchecked;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("{function}: argument {value} is outside the domain")]
    Domain { function: &'static str, value: f64 },
    #[error("expected at least {expected} components, got {got}")]
    Length { expected: usize, got: usize },
    #[error("no sign change on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },
}
