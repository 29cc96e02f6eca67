use super::{BoundsError, DivergencePair};
use crate::curve::{CurvePoint, CurveSource, TradeoffCurve};
use crate::numerics::{binary_kl, bisect_bracket};

const LB_TOL: f64 = 1e-10;

fn bkl(a: f64, b: f64) -> f64 {
    binary_kl(a, b).unwrap_or(f64::NAN)
}

/// Smallest β ≤ α satisfying both binary-KL outer-bound constraints.
pub fn beta_lower_bound(div: &DivergencePair, alpha: f64) -> Result<f64, BoundsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(BoundsError::Alpha(alpha));
    }
    if div.d_out_in == 0.0 && div.d_in_out == 0.0 {
        return Ok(alpha);
    }
    // d(α‖β) ≤ D(out‖in): d(α‖·) falls from +∞ at 0 to 0 at α.
    let beta1 = if div.d_out_in == 0.0 {
        alpha
    } else if div.d_out_in.is_infinite() {
        0.0
    } else {
        let (_, hi) = bisect_bracket(|b| bkl(alpha, b) - div.d_out_in, 0.0, alpha, LB_TOL)?;
        hi
    };
    // d(β‖α) ≤ D(in‖out): d(·‖α) falls from −ln(1−α) at 0 to 0 at α.
    let beta2 = if div.d_in_out == 0.0 {
        alpha
    } else if div.d_in_out >= -(1.0 - alpha).ln() {
        0.0
    } else {
        let (_, hi) = bisect_bracket(|b| bkl(b, alpha) - div.d_in_out, 0.0, alpha, LB_TOL)?;
        hi
    };
    Ok(beta1.max(beta2).clamp(0.0, alpha))
}

/// Lower bound on the trade-off function over an interior α grid.
pub fn beta_lb_curve(div: &DivergencePair, alphas: &[f64]) -> Result<TradeoffCurve, BoundsError> {
    let mut prev = 0.0;
    let mut points = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        if alpha <= prev && !points.is_empty() {
            return Err(BoundsError::Grid("α grid must be strictly increasing".into()));
        }
        prev = alpha;
        points.push(CurvePoint {
            alpha,
            beta: beta_lower_bound(div, alpha)?,
            beta_se: 0.0,
        });
    }
    Ok(TradeoffCurve::new(points, CurveSource::LowerBound)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::uniform_alpha_grid;

    #[test]
    fn zero_divergence_gives_diagonal() {
        let div = DivergencePair { d_out_in: 0.0, d_in_out: 0.0 };
        assert_eq!(beta_lower_bound(&div, 0.5).unwrap(), 0.5);
        let c = beta_lb_curve(&div, &uniform_alpha_grid(999)).unwrap();
        assert!(c.points().iter().all(|p| (p.beta - p.alpha).abs() <= 1e-10));
    }

    #[test]
    fn endpoints_rejected() {
        let div = DivergencePair { d_out_in: 0.1, d_in_out: 0.1 };
        assert!(beta_lower_bound(&div, 0.0).is_err());
        assert!(beta_lower_bound(&div, 1.0).is_err());
    }

    #[test]
    fn matches_dense_feasibility_scan() {
        let div = DivergencePair { d_out_in: 0.5, d_in_out: 0.5 };
        let alpha = 0.9;
        let b = beta_lower_bound(&div, alpha).unwrap();
        assert!(b < alpha);
        // Smallest grid β satisfying both constraints.
        let n = 1_000_000;
        let scan = (0..=n)
            .map(|i| alpha * i as f64 / n as f64)
            .find(|&x| {
                binary_kl(alpha, x).unwrap() <= div.d_out_in
                    && binary_kl(x, alpha).unwrap() <= div.d_in_out
            })
            .unwrap();
        assert!((b - scan).abs() <= alpha / n as f64 + 1e-9, "{b} vs {scan}");
    }

    #[test]
    fn feasible_and_below_diagonal() {
        for (d1, d2) in [(0.01, 0.02), (0.3, 0.1), (2.0, 5.0), (0.0, 0.4), (0.4, 0.0)] {
            let div = DivergencePair { d_out_in: d1, d_in_out: d2 };
            let c = beta_lb_curve(&div, &uniform_alpha_grid(199)).unwrap();
            let mut last = 0.0;
            for p in c.points() {
                assert!(p.beta <= p.alpha);
                assert!(p.beta >= last);
                last = p.beta;
                assert!(binary_kl(p.alpha, p.beta).unwrap() <= d1 + 1e-8);
                assert!(binary_kl(p.beta, p.alpha).unwrap() <= d2 + 1e-8);
            }
        }
    }
}
