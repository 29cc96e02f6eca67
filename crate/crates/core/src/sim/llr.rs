use super::SimError;
use crate::numerics::log_multivariate_beta;
use crate::uncertainty::DirichletPair;

/// Probabilities below this value are raised to it before taking logs.
pub const LOG_FLOOR: f64 = 1e-300;

/// `ln f_out(x) − ln f_in(x) = c + Σ_k w_k ln x_k` for a Dirichlet pair.
#[derive(Debug, Clone)]
pub(crate) struct LlrKernel {
    constant: f64,
    weights: Vec<f64>,
}

impl LlrKernel {
    pub(crate) fn new(pair: &DirichletPair) -> Result<Self, SimError> {
        let constant = log_multivariate_beta(pair.gamma_in())? - log_multivariate_beta(pair.gamma_out())?;
        let weights = pair
            .gamma_out()
            .iter()
            .zip(pair.gamma_in())
            .map(|(o, i)| o - i)
            .collect();
        Ok(Self { constant, weights })
    }

    /// Kernel of the Beta marginal of the true-label confidence.
    pub(crate) fn true_label(pair: &DirichletPair) -> Result<Self, SimError> {
        Self::new(&pair.true_label_marginal())
    }

    /// Evaluates at `x`, counting floor hits in `clamped`.
    #[inline]
    pub(crate) fn eval(&self, x: &[f64], clamped: &mut u64) -> f64 {
        let mut acc = self.constant;
        for (&w, &xi) in self.weights.iter().zip(x) {
            if w != 0.0 {
                acc += w * ln_floor(xi, clamped);
            }
        }
        acc
    }

    /// Evaluates the two-component kernel at `(p0, rest)`.
    #[inline]
    pub(crate) fn eval2(&self, p0: f64, rest: f64, clamped: &mut u64) -> f64 {
        self.eval(&[p0, rest], clamped)
    }
}

#[inline]
fn ln_floor(x: f64, clamped: &mut u64) -> f64 {
    if x < LOG_FLOOR {
        *clamped += 1;
        LOG_FLOOR.ln()
    } else {
        x.ln()
    }
}

fn check_probs(p: &[f64]) -> Result<(), SimError> {
    if let Some(bad) = p.iter().find(|x| !(x.is_finite() && **x >= 0.0 && **x <= 1.0)) {
        return Err(SimError::Invalid(format!("probability component {bad} outside [0, 1]")));
    }
    Ok(())
}

/// Log-likelihood ratio `ln f_out(p) − ln f_in(p)` of a confidence vector.
/// Zero components are floored at [`LOG_FLOOR`].
pub fn llr_cv(p: &[f64], pair: &DirichletPair) -> Result<f64, SimError> {
    if p.len() != pair.k() {
        return Err(SimError::Invalid(format!(
            "confidence vector has {} components, pair has {}",
            p.len(),
            pair.k()
        )));
    }
    check_probs(p)?;
    let mut clamped = 0;
    Ok(LlrKernel::new(pair)?.eval(p, &mut clamped))
}

/// Log-likelihood ratio of the true-label confidence `p0` under the Beta
/// marginals of the pair.
pub fn llr_tlc(p0: f64, pair: &DirichletPair) -> Result<f64, SimError> {
    check_probs(&[p0])?;
    let mut clamped = 0;
    Ok(LlrKernel::true_label(pair)?.eval2(p0, 1.0 - p0, &mut clamped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uncertainty::{profile_to_pair, UncertaintyProfile};

    fn headline() -> DirichletPair {
        profile_to_pair(&UncertaintyProfile::new(10, 0.2, 0.5, 0.25).unwrap()).unwrap()
    }

    #[test]
    fn identical_pair_is_uninformative() {
        let pair = DirichletPair::new(vec![1.5, 0.3, 0.2], vec![1.5, 0.3, 0.2]).unwrap();
        assert_eq!(llr_cv(&[0.2, 0.5, 0.3], &pair).unwrap(), 0.0);
        assert_eq!(llr_tlc(0.7, &pair).unwrap(), 0.0);
    }

    #[test]
    fn confident_true_label_favours_membership() {
        let mut p = vec![0.01 / 9.0; 10];
        p[0] = 0.99;
        assert!(llr_cv(&p, &headline()).unwrap() < 0.0);
    }

    #[test]
    fn antisymmetric_under_swap() {
        let pair = headline();
        let p = [0.3, 0.1, 0.05, 0.05, 0.1, 0.1, 0.1, 0.05, 0.05, 0.1];
        let a = llr_cv(&p, &pair).unwrap();
        let b = llr_cv(&p, &pair.swapped()).unwrap();
        assert!((a + b).abs() < 1e-12);
    }

    #[test]
    fn tlc_hand_value() {
        // Beta(2, 2) vs Beta(2.4, 1.6) at 0.9.
        let v = llr_tlc(0.9, &headline()).unwrap();
        assert!((v - -0.774622274182402).abs() < 1e-12, "{v}");
        let two = headline().true_label_marginal();
        assert!((v - llr_cv(&[0.9, 0.1], &two).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn zero_component_is_floored() {
        let pair = headline();
        let mut p = vec![0.0; 10];
        p[0] = 1.0;
        let v = llr_cv(&p, &pair).unwrap();
        assert!(v.is_finite());
        let mut clamped = 0;
        LlrKernel::new(&pair).unwrap().eval(&p, &mut clamped);
        assert_eq!(clamped, 9);
        assert!(llr_cv(&[0.5; 3], &pair).is_err());
        assert!(llr_tlc(1.5, &pair).is_err());
    }
}
