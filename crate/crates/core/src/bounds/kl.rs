use serde::Serialize;

use super::BoundsError;
use crate::numerics::{digamma_unchecked, log_multivariate_beta};
use crate::uncertainty::DirichletPair;

/// KL divergence `D(Dir(γ_p) ‖ Dir(γ_q))` in nats.
pub fn dirichlet_kl(gamma_p: &[f64], gamma_q: &[f64]) -> Result<f64, BoundsError> {
    if gamma_p.len() != gamma_q.len() {
        return Err(BoundsError::Length {
            left: gamma_p.len(),
            right: gamma_q.len(),
        });
    }
    if gamma_p == gamma_q {
        return Ok(0.0);
    }
    let ln_b_p = log_multivariate_beta(gamma_p)?;
    let ln_b_q = log_multivariate_beta(gamma_q)?;
    let psi_sum = digamma_unchecked(gamma_p.iter().sum());
    let cross: f64 = gamma_p
        .iter()
        .zip(gamma_q)
        .map(|(&gp, &gq)| (gp - gq) * (digamma_unchecked(gp) - psi_sum))
        .sum();
    Ok((ln_b_q - ln_b_p + cross).max(0.0))
}

/// `D(f_out ‖ f_in)` and `D(f_in ‖ f_out)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergencePair {
    pub d_out_in: f64,
    pub d_in_out: f64,
}

impl DivergencePair {
    pub fn between(pair: &DirichletPair) -> Result<Self, BoundsError> {
        Ok(Self {
            d_out_in: dirichlet_kl(pair.gamma_out(), pair.gamma_in())?,
            d_in_out: dirichlet_kl(pair.gamma_in(), pair.gamma_out())?,
        })
    }

    pub fn symmetric(&self) -> f64 {
        self.d_out_in + self.d_in_out
    }

    /// Both divergences multiplied by `factor` (a contraction coefficient).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            d_out_in: self.d_out_in * factor,
            d_in_out: self.d_in_out * factor,
        }
    }
}

/// `√(D(f_out‖f_in) + D(f_in‖f_out))`, the Pinsker-type advantage ceiling.
pub fn pinsker_advantage_ub(div: &DivergencePair) -> f64 {
    let s = div.symmetric();
    if s.is_finite() {
        s.sqrt()
    } else {
        f64::INFINITY
    }
}
