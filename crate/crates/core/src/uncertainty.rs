//! Calibration error, aleatoric and epistemic uncertainty, and the Dirichlet
//! output models they induce.
//!
//! Index 0 of every probability or parameter vector is the true label.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest aleatoric uncertainty accepted; at zero the non-true-label
/// parameters of the out model vanish.
pub const MIN_EPS_A: f64 = 1e-9;

/// Relative tolerance on the equal-sum condition of a model pair.
pub const SUM_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("invalid profile: requires {constraint} (got {detail})")]
    Profile {
        constraint: &'static str,
        detail: String,
    },
    #[error("invalid Dirichlet pair: {0}")]
    Pair(String),
}

impl ValidationError {
    fn profile(constraint: &'static str, detail: String) -> Self {
        Self::Profile { constraint, detail }
    }
}

/// The triple (Δ, ε_a, ε_e) plus the class count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyProfile {
    pub k: usize,
    pub delta: f64,
    pub eps_a: f64,
    pub eps_e: f64,
}

impl UncertaintyProfile {
    pub fn new(k: usize, delta: f64, eps_a: f64, eps_e: f64) -> Result<Self, ValidationError> {
        let profile = Self {
            k,
            delta,
            eps_a,
            eps_e,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        let Self {
            k,
            delta,
            eps_a,
            eps_e,
        } = *self;
        if k < 2 {
            return Err(ValidationError::profile("K ≥ 2", format!("K={k}")));
        }
        if !(delta.is_finite() && eps_a.is_finite() && eps_e.is_finite()) {
            return Err(ValidationError::profile(
                "finite Δ, ϵa, ϵe",
                format!("Δ={delta}, ϵa={eps_a}, ϵe={eps_e}"),
            ));
        }
        if eps_e <= 0.0 {
            return Err(ValidationError::profile("ϵe > 0", format!("ϵe={eps_e}")));
        }
        if eps_a < MIN_EPS_A {
            return Err(ValidationError::profile("ϵa ≥ 1e-9", format!("ϵa={eps_a}")));
        }
        let max_eps_a = 1.0 - 1.0 / k as f64;
        if eps_a > max_eps_a {
            return Err(ValidationError::profile(
                "ϵa ≤ 1−1/K",
                format!("ϵa={eps_a}, 1−1/K={max_eps_a}"),
            ));
        }
        if delta <= -1.0 {
            return Err(ValidationError::profile("Δ > −1", format!("Δ={delta}")));
        }
        let lower = delta / (1.0 + delta);
        if !(lower < eps_a && eps_a < 1.0) {
            return Err(ValidationError::profile(
                "Δ/(1+Δ)<ϵa<1",
                format!("Δ/(1+Δ)={lower:.6}, ϵa={eps_a}"),
            ));
        }
        Ok(())
    }

    /// Ground-truth probability of the true label, `1 − ε_a`.
    pub fn ground_truth(&self) -> GroundTruthConfidence {
        GroundTruthConfidence {
            p_star_0: 1.0 - self.eps_a,
        }
    }

    /// Largest Δ keeping every in-model parameter positive, `ε_a/(1−ε_a)`.
    pub fn max_delta(eps_a: f64) -> f64 {
        eps_a / (1.0 - eps_a)
    }

    /// The four distinct digamma arguments of the CV bound:
    /// `γ^in_0, γ^out_0, γ^out_k, γ^in_k`.
    pub fn digamma_arguments(&self) -> [f64; 4] {
        let km1 = (self.k - 1) as f64;
        [
            (1.0 + self.delta) * (1.0 - self.eps_a) / self.eps_e,
            (1.0 - self.eps_a) / self.eps_e,
            self.eps_a / (km1 * self.eps_e),
            (self.eps_a * (1.0 + self.delta) - self.delta) / (km1 * self.eps_e),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthConfidence {
    pub p_star_0: f64,
}

/// Parameter vectors of the out/in Dirichlet output distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletPair {
    gamma_out: Vec<f64>,
    gamma_in: Vec<f64>,
}

impl DirichletPair {
    /// Model pair: positive components of equal length and equal sums.
    pub fn new(gamma_out: Vec<f64>, gamma_in: Vec<f64>) -> Result<Self, ValidationError> {
        let pair = Self::from_fitted(gamma_out, gamma_in)?;
        let (so, si) = (pair.sum_out(), pair.sum_in());
        if (so - si).abs() > SUM_REL_TOL * so.max(si) {
            return Err(ValidationError::Pair(format!(
                "parameter sums differ: Σγ_out={so}, Σγ_in={si}"
            )));
        }
        Ok(pair)
    }

    /// Pair of independently fitted models; sums need not agree.
    pub fn from_fitted(gamma_out: Vec<f64>, gamma_in: Vec<f64>) -> Result<Self, ValidationError> {
        if gamma_out.len() != gamma_in.len() {
            return Err(ValidationError::Pair(format!(
                "length mismatch: {} vs {}",
                gamma_out.len(),
                gamma_in.len()
            )));
        }
        if gamma_out.len() < 2 {
            return Err(ValidationError::Pair("need at least 2 classes".into()));
        }
        if let Some(bad) = gamma_out
            .iter()
            .chain(&gamma_in)
            .find(|g| !(g.is_finite() && **g > 0.0))
        {
            return Err(ValidationError::Pair(format!(
                "components must be positive and finite, found {bad}"
            )));
        }
        Ok(Self { gamma_out, gamma_in })
    }

    pub fn gamma_out(&self) -> &[f64] {
        &self.gamma_out
    }

    pub fn gamma_in(&self) -> &[f64] {
        &self.gamma_in
    }

    pub fn k(&self) -> usize {
        self.gamma_out.len()
    }

    pub fn sum_out(&self) -> f64 {
        self.gamma_out.iter().sum()
    }

    pub fn sum_in(&self) -> f64 {
        self.gamma_in.iter().sum()
    }

    pub fn swapped(&self) -> Self {
        Self {
            gamma_out: self.gamma_in.clone(),
            gamma_in: self.gamma_out.clone(),
        }
    }

    /// Two-component pair `(γ_0, Σ_{k≥1} γ_k)` governing the true-label marginal.
    pub fn true_label_marginal(&self) -> Self {
        let agg = |g: &[f64]| vec![g[0], g[1..].iter().sum()];
        Self {
            gamma_out: agg(&self.gamma_out),
            gamma_in: agg(&self.gamma_in),
        }
    }

    pub fn is_identical(&self) -> bool {
        self.gamma_out == self.gamma_in
    }
}

/// Maps a profile to its out/in Dirichlet parameters.
pub fn profile_to_pair(profile: &UncertaintyProfile) -> Result<DirichletPair, ValidationError> {
    profile.validate()?;
    let UncertaintyProfile {
        k,
        delta,
        eps_a,
        eps_e,
    } = *profile;
    let km1 = (k - 1) as f64;
    let mut gamma_out = vec![eps_a / (km1 * eps_e); k];
    gamma_out[0] = (1.0 - eps_a) / eps_e;
    let mut gamma_in = vec![(eps_a * delta + eps_a - delta) / (km1 * eps_e); k];
    gamma_in[0] = (1.0 + delta) * (1.0 - eps_a) / eps_e;
    DirichletPair::from_fitted(gamma_out, gamma_in)
}

fn dirichlet_means(gamma: &[f64]) -> Vec<f64> {
    let s: f64 = gamma.iter().sum();
    gamma.iter().map(|g| g / s).collect()
}

fn dirichlet_variances(gamma: &[f64]) -> Vec<f64> {
    let s: f64 = gamma.iter().sum();
    gamma
        .iter()
        .map(|g| g * (s - g) / (s * s * (s + 1.0)))
        .collect()
}

/// Component means `(out, in)`.
pub fn pair_means(pair: &DirichletPair) -> (Vec<f64>, Vec<f64>) {
    (dirichlet_means(&pair.gamma_out), dirichlet_means(&pair.gamma_in))
}

/// Component variances `(out, in)`.
pub fn pair_variances(pair: &DirichletPair) -> (Vec<f64>, Vec<f64>) {
    (
        dirichlet_variances(&pair.gamma_out),
        dirichlet_variances(&pair.gamma_in),
    )
}

/// Recovers (Δ, ε_a, ε_e) from a model pair and the ground-truth confidence.
pub fn infer_profile(pair: &DirichletPair, p_star_0: f64) -> Result<UncertaintyProfile, ValidationError> {
    infer_profile_with_tolerance(pair, p_star_0, SUM_REL_TOL)
}

/// As [`infer_profile`], accepting out/in parameter sums that differ by up to
/// `sum_rel_tol` (relative). Fitted pairs never agree exactly.
pub fn infer_profile_with_tolerance(
    pair: &DirichletPair,
    p_star_0: f64,
    sum_rel_tol: f64,
) -> Result<UncertaintyProfile, ValidationError> {
    let k = pair.k();
    if !(p_star_0 >= 1.0 / k as f64 && p_star_0 <= 1.0) {
        return Err(ValidationError::profile(
            "1/K ≤ p*0 ≤ 1",
            format!("p*0={p_star_0}, K={k}"),
        ));
    }
    let (so, si) = (pair.sum_out(), pair.sum_in());
    let rel = (so - si).abs() / so.max(si);
    if rel > sum_rel_tol {
        return Err(ValidationError::Pair(format!(
            "parameter sums differ by {rel:.3e} relative (Σγ_out={so}, Σγ_in={si})"
        )));
    }
    let eps_e = 1.0 / so;
    let eps_a = 1.0 - p_star_0;
    let delta = (pair.gamma_in[0] / si - p_star_0) / p_star_0;
    UncertaintyProfile::new(k, delta, eps_a, eps_e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn headline() -> UncertaintyProfile {
        UncertaintyProfile::new(10, 0.2, 0.5, 0.25).unwrap()
    }

    #[test]
    fn headline_parameters() {
        let pair = profile_to_pair(&headline()).unwrap();
        assert!((pair.gamma_out()[0] - 2.0).abs() < 1e-15);
        assert!((pair.gamma_in()[0] - 2.4).abs() < 1e-14);
        for k in 1..10 {
            assert!((pair.gamma_out()[k] - 2.0 / 9.0).abs() < 1e-15);
            assert!((pair.gamma_in()[k] - 1.6 / 9.0).abs() < 1e-15);
        }
        assert!((pair.sum_out() - 4.0).abs() < 1e-13);
        assert!((pair.sum_in() - 4.0).abs() < 1e-13);
    }

    #[test]
    fn zero_delta_collapses_pair() {
        let p = UncertaintyProfile::new(10, 0.0, 0.5, 0.25).unwrap();
        let pair = profile_to_pair(&p).unwrap();
        assert_eq!(pair.gamma_out(), pair.gamma_in());
    }

    #[test]
    fn validation_names_the_inequality() {
        let err = UncertaintyProfile::new(10, 0.2, 0.1, 0.25).unwrap_err();
        assert!(err.to_string().contains("Δ/(1+Δ)<ϵa<1"), "{err}");
        assert!(UncertaintyProfile::new(1, 0.0, 0.5, 0.25).is_err());
        assert!(UncertaintyProfile::new(10, 0.2, 0.5, 0.0).is_err());
        assert!(UncertaintyProfile::new(10, 0.0, 0.0, 0.25).is_err());
        assert!(UncertaintyProfile::new(2, 0.0, 0.6, 0.25).unwrap_err().to_string().contains("1−1/K"));
        assert!(UncertaintyProfile::new(10, -1.0, 0.5, 0.25).is_err());
    }

    #[test]
    fn negative_delta_is_accepted() {
        let p = UncertaintyProfile::new(10, -0.3, 0.5, 0.25).unwrap();
        let pair = profile_to_pair(&p).unwrap();
        assert!(pair.gamma_in().iter().all(|&g| g > 0.0));
        let (mo, mi) = pair_means(&pair);
        assert!(mi[0] < mo[0]);
    }

    #[test]
    fn means_and_variances() {
        let pair = profile_to_pair(&headline()).unwrap();
        let (mo, mi) = pair_means(&pair);
        assert!((mi[0] - 0.6).abs() < 1e-14);
        assert!((mo[0] - 0.5).abs() < 1e-14);
        let sym = DirichletPair::new(vec![1.0; 4], vec![1.0; 4]).unwrap();
        let (m, _) = pair_means(&sym);
        assert!(m.iter().all(|&x| (x - 0.25).abs() < 1e-15));
        let unit = DirichletPair::new(vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let (v, _) = pair_variances(&unit);
        assert!(v.iter().all(|&x| (x - 1.0 / 12.0).abs() < 1e-15));
        let (vo, vi) = pair_variances(&pair);
        assert!(vo.iter().chain(&vi).all(|&x| (0.0..=0.25).contains(&x)));
    }

    #[test]
    fn variance_vanishes_as_epistemic_uncertainty_shrinks() {
        let mut last = f64::INFINITY;
        for eps_e in [1.0, 0.1, 0.01, 1e-3, 1e-5] {
            let pair = profile_to_pair(&UncertaintyProfile::new(10, 0.2, 0.5, eps_e).unwrap()).unwrap();
            let (vo, _) = pair_variances(&pair);
            assert!(vo[0] < last);
            last = vo[0];
        }
        assert!(last < 1e-5);
    }

    #[test]
    fn infer_round_trip() {
        let p = headline();
        let pair = profile_to_pair(&p).unwrap();
        let back = infer_profile(&pair, 0.5).unwrap();
        assert_eq!(back.k, 10);
        assert!((back.delta - 0.2).abs() < 1e-12);
        assert!((back.eps_a - 0.5).abs() < 1e-12);
        assert!((back.eps_e - 0.25).abs() < 1e-12);
    }

    #[test]
    fn infer_identical_pair_has_zero_delta() {
        let pair = DirichletPair::new(vec![3.0, 1.0, 1.0], vec![3.0, 1.0, 1.0]).unwrap();
        let back = infer_profile(&pair, 0.6).unwrap();
        assert!(back.delta.abs() < 1e-15);
    }

    #[test]
    fn infer_rejects_mismatched_sums() {
        let pair = DirichletPair::from_fitted(vec![2.0, 2.0], vec![2.5, 2.0]).unwrap();
        assert!(infer_profile(&pair, 0.5).is_err());
        assert!(infer_profile_with_tolerance(&pair, 0.5, 0.2).is_ok());
        assert!(DirichletPair::new(vec![2.0, 2.0], vec![2.5, 2.0]).is_err());
    }

    #[test]
    fn infer_from_fitted_style_pair() {
        // Unequal non-true components, as a fit would produce.
        let pair = DirichletPair::from_fitted(
            vec![5.1, 0.31, 0.28, 0.33],
            vec![5.9, 0.2, 0.25, 0.22],
        )
        .unwrap();
        let p_star = 0.8;
        let p = infer_profile_with_tolerance(&pair, p_star, 0.1).unwrap();
        let so = pair.sum_out();
        let si = pair.sum_in();
        assert!((p.eps_e - 1.0 / so).abs() < 1e-15);
        assert!((p.eps_a - 0.2).abs() < 1e-15);
        assert!((p.delta - (5.9 / si - p_star) / p_star).abs() < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn valid_profile() -> impl Strategy<Value = UncertaintyProfile> {
            (2usize..20, 0.0f64..1.0, 0.01f64..1.0, 0.01f64..2.0, -0.5f64..1.0).prop_filter_map(
                "valid profile",
                |(k, ua, ud, eps_e, sign)| {
                    let eps_a = (1e-3 + ua * (1.0 - 1.0 / k as f64 - 1e-3)).max(1e-3);
                    let dmax = UncertaintyProfile::max_delta(eps_a);
                    let delta = if sign < 0.0 { sign * ud } else { ud * dmax * 0.999 };
                    UncertaintyProfile::new(k, delta, eps_a, eps_e).ok()
                },
            )
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(200))]
            #[test]
            fn pair_invariants(p in valid_profile()) {
                let pair = profile_to_pair(&p).unwrap();
                prop_assert!(pair.gamma_out().iter().chain(pair.gamma_in()).all(|&g| g > 0.0));
                let target = 1.0 / p.eps_e;
                prop_assert!((pair.sum_out() - target).abs() <= 1e-12 * target);
                prop_assert!((pair.sum_in() - target).abs() <= 1e-12 * target);
                let (mo, mi) = pair_means(&pair);
                prop_assert_eq!(mi[0] > mo[0], p.delta > 0.0);
                let back = infer_profile(&pair, 1.0 - p.eps_a).unwrap();
                prop_assert!((back.delta - p.delta).abs() <= 1e-12);
                prop_assert!((back.eps_a - p.eps_a).abs() <= 1e-12);
                prop_assert!((back.eps_e - p.eps_e).abs() <= 1e-12 * p.eps_e);
            }
        }
    }
}
