use serde::Serialize;

use super::{delta_factor, pinsker_advantage_ub, BoundsError, DeltaFactor, DivergencePair};
use crate::numerics::digamma;
use crate::sim::DisclosureMode;
use crate::uncertainty::{profile_to_pair, DirichletPair, UncertaintyProfile};

/// Relative agreement required between the digamma closed form and the
/// symmetrized-KL composition.
pub const ROUTE_REL_TOL: f64 = 1e-9;
const ROUTE_ABS_TOL: f64 = 1e-12;

/// Advantage upper bounds for one disclosure mode, clipped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdvantageBounds {
    pub mode: DisclosureMode,
    pub exact: f64,
    pub approx: f64,
    /// Unclipped values; the Pinsker form can exceed 1.
    pub raw_exact: f64,
    pub raw_approx: f64,
    /// Divergences of the observation actually seen by the attacker. For DS
    /// these are the CV divergences scaled by `δ²`.
    pub divergences: DivergencePair,
    pub delta_factor: Option<DeltaFactor>,
}

impl AdvantageBounds {
    fn new(
        mode: DisclosureMode,
        raw_exact: f64,
        raw_approx: f64,
        divergences: DivergencePair,
        delta_factor: Option<DeltaFactor>,
    ) -> Self {
        Self {
            mode,
            exact: raw_exact.clamp(0.0, 1.0),
            approx: raw_approx.clamp(0.0, 1.0),
            raw_exact,
            raw_approx,
            divergences,
            delta_factor,
        }
    }
}

/// Digamma closed form of the CV bound with `m` non-true classes sharing
/// the residual mass (`m = K − 1` for CV, `m = 1` for TLC).
fn digamma_route(p: &UncertaintyProfile, m: f64) -> Result<f64, BoundsError> {
    let UncertaintyProfile {
        delta,
        eps_a,
        eps_e,
        ..
    } = *p;
    let in0 = (1.0 + delta) * (1.0 - eps_a) / eps_e;
    let out0 = (1.0 - eps_a) / eps_e;
    let outk = eps_a / (m * eps_e);
    let ink = (eps_a * (1.0 + delta) - delta) / (m * eps_e);
    let s = delta * (1.0 - eps_a) / eps_e
        * (digamma(in0)? - digamma(out0)? + digamma(outk)? - digamma(ink)?);
    Ok(s.max(0.0).sqrt())
}

/// Closed form obtained from `ψ(x) ≈ ln x − 1/(2x)`.
fn approx_route(p: &UncertaintyProfile, m: f64) -> f64 {
    let UncertaintyProfile {
        delta,
        eps_a,
        eps_e,
        ..
    } = *p;
    let shifted = (1.0 + delta) * eps_a - delta;
    let t1 = delta * (1.0 - eps_a) / eps_e * ((1.0 + delta) * eps_a / shifted).ln();
    let t2 = delta * delta * (1.0 - eps_a).powi(2) * m / (2.0 * eps_a * shifted);
    let t3 = delta * delta / (2.0 * (1.0 + delta));
    (t1 + t2 + t3).max(0.0).sqrt()
}

fn checked_exact(pair: &DirichletPair, formula: f64) -> Result<(f64, DivergencePair), BoundsError> {
    let div = DivergencePair::between(pair)?;
    let composed = pinsker_advantage_ub(&div);
    let scale = composed.abs().max(formula.abs());
    if (composed - formula).abs() > ROUTE_REL_TOL * scale + ROUTE_ABS_TOL {
        return Err(BoundsError::RouteMismatch { formula, composed });
    }
    Ok((composed, div))
}

/// Advantage bound under full confidence-vector disclosure.
pub fn cv_advantage_ub(profile: &UncertaintyProfile) -> Result<AdvantageBounds, BoundsError> {
    let pair = profile_to_pair(profile)?;
    let m = (profile.k - 1) as f64;
    let (exact, div) = checked_exact(&pair, digamma_route(profile, m)?)?;
    Ok(AdvantageBounds::new(DisclosureMode::Cv, exact, approx_route(profile, m), div, None))
}

/// Advantage bound under true-label-confidence disclosure, through the Beta
/// marginal of the true-label component.
pub fn tlc_advantage_ub(profile: &UncertaintyProfile) -> Result<AdvantageBounds, BoundsError> {
    let pair = profile_to_pair(profile)?.true_label_marginal();
    let (exact, div) = checked_exact(&pair, digamma_route(profile, 1.0)?)?;
    Ok(AdvantageBounds::new(DisclosureMode::Tlc, exact, approx_route(profile, 1.0), div, None))
}

/// Advantage bound under decision-set disclosure: `δ_{T,q}` times the CV bound.
pub fn ds_advantage_ub(
    profile: &UncertaintyProfile,
    temperature: f64,
    q: f64,
) -> Result<AdvantageBounds, BoundsError> {
    let cv = cv_advantage_ub(profile)?;
    let delta = delta_factor(temperature, q, profile.k)?;
    let d = delta.value;
    Ok(AdvantageBounds::new(
        DisclosureMode::Ds { q, temperature },
        d * cv.raw_exact,
        d * cv.raw_approx,
        cv.divergences.scaled(delta.tv),
        Some(delta),
    ))
}

/// Dispatches on the disclosure mode.
pub fn advantage_ub(
    profile: &UncertaintyProfile,
    mode: &DisclosureMode,
) -> Result<AdvantageBounds, BoundsError> {
    match *mode {
        DisclosureMode::Cv => cv_advantage_ub(profile),
        DisclosureMode::Tlc => tlc_advantage_ub(profile),
        DisclosureMode::Ds { q, temperature } => ds_advantage_ub(profile, temperature, q),
    }
}

/// Pinsker-type bound computed directly from an arbitrary (e.g. fitted)
/// pair. There is no closed-form approximation here, so `approx` repeats
/// `exact`.
pub fn pair_advantage_ub(
    pair: &DirichletPair,
    mode: &DisclosureMode,
) -> Result<AdvantageBounds, BoundsError> {
    let (source, delta) = match *mode {
        DisclosureMode::Cv => (pair.clone(), None),
        DisclosureMode::Tlc => (pair.true_label_marginal(), None),
        DisclosureMode::Ds { q, temperature } => {
            (pair.clone(), Some(delta_factor(temperature, q, pair.k())?))
        }
    };
    let mut div = DivergencePair::between(&source)?;
    let mut raw = pinsker_advantage_ub(&div);
    if let Some(d) = &delta {
        raw *= d.value;
        div = div.scaled(d.tv);
    }
    Ok(AdvantageBounds::new(*mode, raw, raw, div, delta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn headline() -> UncertaintyProfile {
        UncertaintyProfile::new(10, 0.2, 0.5, 0.25).unwrap()
    }

    #[test]
    fn headline_values() {
        let cv = cv_advantage_ub(&headline()).unwrap();
        assert!((cv.exact - 0.75138713969865).abs() < 1e-11);
        assert!((cv.approx - 0.635494067564704).abs() < 1e-12);
        assert!((cv.approx - (0.162186f64 + 0.225 + 0.016667).sqrt()).abs() < 1e-5);
        assert!((cv.divergences.d_out_in - 0.267208147700822).abs() < 1e-11);
        assert!((cv.divergences.d_in_out - 0.297374486003697).abs() < 1e-11);
        let tlc = tlc_advantage_ub(&headline()).unwrap();
        assert!((tlc.exact - 0.459065885000017).abs() < 1e-11);
        assert!((tlc.approx - 0.451500509313038).abs() < 1e-12);
    }

    #[test]
    fn zero_delta_gives_zero() {
        let p = UncertaintyProfile::new(10, 0.0, 0.5, 0.25).unwrap();
        for mode in [
            DisclosureMode::Cv,
            DisclosureMode::Tlc,
            DisclosureMode::Ds { q: 0.2, temperature: 0.05 },
        ] {
            let b = advantage_ub(&p, &mode).unwrap();
            assert_eq!(b.exact, 0.0);
            assert_eq!(b.approx, 0.0);
        }
    }

    #[test]
    fn tlc_equals_two_class_cv() {
        for (delta, eps_a, eps_e) in [(0.2, 0.5, 0.25), (0.05, 0.3, 0.02), (-0.4, 0.1, 1.5)] {
            let k10 = UncertaintyProfile::new(10, delta, eps_a, eps_e).unwrap();
            let k2 = UncertaintyProfile::new(2, delta, eps_a, eps_e).unwrap();
            let tlc = tlc_advantage_ub(&k10).unwrap();
            let cv2 = cv_advantage_ub(&k2).unwrap();
            assert!((tlc.raw_exact - cv2.raw_exact).abs() < 1e-12);
            assert!((tlc.raw_approx - cv2.raw_approx).abs() < 1e-12);
        }
    }

    #[test]
    fn ds_is_delta_times_cv() {
        let cv = cv_advantage_ub(&headline()).unwrap();
        let ds = ds_advantage_ub(&headline(), 0.05, 0.2).unwrap();
        let d = delta_factor(0.05, 0.2, 10).unwrap().value;
        assert!((ds.raw_exact - d * cv.raw_exact).abs() < 1e-15);
        assert!((ds.raw_approx - d * cv.raw_approx).abs() < 1e-15);
        assert!(ds.exact <= cv.exact);
        let cold = ds_advantage_ub(&headline(), 1e6, 0.2).unwrap();
        assert!(cold.exact <= 1e-3 * cv.exact);
    }

    #[test]
    fn raw_value_kept_when_clipped() {
        let p = UncertaintyProfile::new(10, 0.9, 0.5, 0.01).unwrap();
        let cv = cv_advantage_ub(&p).unwrap();
        assert_eq!(cv.exact, 1.0);
        assert!(cv.raw_exact > 1.0);
    }

    #[test]
    fn pair_route_matches_profile_route() {
        let pair = profile_to_pair(&headline()).unwrap();
        for mode in [DisclosureMode::Cv, DisclosureMode::Tlc] {
            let a = pair_advantage_ub(&pair, &mode).unwrap();
            let b = advantage_ub(&headline(), &mode).unwrap();
            assert!((a.exact - b.exact).abs() < 1e-12);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn profile() -> impl Strategy<Value = UncertaintyProfile> {
            (2usize..16, 0.0f64..1.0, 0.0f64..1.0, 0.005f64..3.0).prop_filter_map(
                "valid",
                |(k, ua, ud, eps_e)| {
                    let eps_a = 0.01 + ua * (1.0 - 1.0 / k as f64 - 0.01);
                    let delta = ud * UncertaintyProfile::max_delta(eps_a) * 0.999;
                    UncertaintyProfile::new(k, delta, eps_a, eps_e).ok()
                },
            )
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(100))]
            #[test]
            fn chain_and_routes(p in profile(), t in 0.0f64..0.5, q in 0.0f64..=1.0) {
                let cv = cv_advantage_ub(&p).unwrap();
                let tlc = tlc_advantage_ub(&p).unwrap();
                prop_assert!(tlc.raw_exact <= cv.raw_exact + 1e-12);
                let ds = ds_advantage_ub(&p, t, q).unwrap();
                prop_assert!(ds.exact <= cv.exact + 1e-15);
                prop_assert!(cv.exact >= 0.0 && cv.approx >= 0.0);
            }
        }
    }
}
