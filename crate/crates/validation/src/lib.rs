//! Shared helpers for the acceptance checks: random valid profiles and
//! pass/fail bookkeeping.

use liralab::{RngStream, UncertaintyProfile};
use rand::Rng;

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

/// Ranges for [`random_profile`].
#[derive(Debug, Clone, Copy)]
pub struct ProfileRanges {
    pub k: (usize, usize),
    pub eps_a: (f64, f64),
    pub eps_e: (f64, f64),
    /// Δ as a fraction of its largest valid value `ε_a/(1−ε_a)`.
    pub delta_frac: (f64, f64),
    pub delta_max: f64,
}

impl Default for ProfileRanges {
    fn default() -> Self {
        Self {
            k: (2, 10),
            eps_a: (0.05, 0.95),
            eps_e: (0.02, 1.0),
            delta_frac: (0.0, 0.95),
            delta_max: 2.0,
        }
    }
}

/// A profile drawn uniformly from `ranges`; always valid.
pub fn random_profile(rng: &mut RngStream, ranges: &ProfileRanges) -> UncertaintyProfile {
    let k = rng.random_range(ranges.k.0..=ranges.k.1);
    // ε_a ≤ 1 − 1/K keeps the true label at least as likely as a uniform guess.
    let eps_a_hi = ranges.eps_a.1.min(1.0 - 1.0 / k as f64);
    let eps_a = rng.random_range(ranges.eps_a.0.min(0.5 * eps_a_hi)..eps_a_hi);
    let eps_e = rng.random_range(ranges.eps_e.0..ranges.eps_e.1);
    let cap = UncertaintyProfile::max_delta(eps_a).min(ranges.delta_max);
    let delta = cap * rng.random_range(ranges.delta_frac.0..ranges.delta_frac.1);
    UncertaintyProfile::new(k, delta, eps_a, eps_e).expect("drawn inside the valid region")
}

/// `(x − y)` is within `z` combined standard errors of zero or below.
pub fn at_most(x: f64, y: f64, se_x: f64, se_y: f64, z: f64) -> bool {
    x - y <= z * se_x.hypot(se_y)
}
