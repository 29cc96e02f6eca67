//! Trade-off curves `α ↦ β_α` and the advantage metrics read off them.

use serde::Serialize;
use thiserror::Error;

use crate::sim::DisclosureMode;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("α={alpha} lies outside the curve span [{lo}, {hi}]")]
    OutOfRange { alpha: f64, lo: f64, hi: f64 },
    #[error("malformed curve: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub alpha: f64,
    pub beta: f64,
    /// Monte Carlo standard error of `beta` (zero for analytical curves).
    pub beta_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CurveSource {
    Simulated {
        mode: DisclosureMode,
        n_samples: usize,
        seed: u64,
        stream_id: u64,
    },
    LowerBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffCurve {
    points: Vec<CurvePoint>,
    source: CurveSource,
    avg_advantage_se: f64,
    clamped: u64,
}

impl TradeoffCurve {
    /// Builds a curve from points sorted by α. β is clipped to `[0, 1]` and
    /// made nondecreasing in α (the NP-frontier cleanup).
    pub fn new(mut points: Vec<CurvePoint>, source: CurveSource) -> Result<Self, CurveError> {
        if points.is_empty() {
            return Err(CurveError::Malformed("no points".into()));
        }
        let mut prev_alpha = f64::NEG_INFINITY;
        let mut running = 0.0f64;
        for p in points.iter_mut() {
            if !(0.0..=1.0).contains(&p.alpha) || p.alpha < prev_alpha {
                return Err(CurveError::Malformed(format!(
                    "α values must be sorted inside [0, 1], saw {} after {}",
                    p.alpha, prev_alpha
                )));
            }
            if p.beta.is_nan() {
                return Err(CurveError::Malformed(format!("β is NaN at α={}", p.alpha)));
            }
            prev_alpha = p.alpha;
            running = running.max(p.beta.clamp(0.0, 1.0));
            p.beta = running;
        }
        Ok(Self {
            points,
            source,
            avg_advantage_se: 0.0,
            clamped: 0,
        })
    }

    pub(crate) fn with_diagnostics(mut self, avg_advantage_se: f64, clamped: u64) -> Self {
        self.avg_advantage_se = avg_advantage_se;
        self.clamped = clamped;
        self
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn source(&self) -> &CurveSource {
        &self.source
    }

    /// Number of log-density evaluations that hit the clamping floor.
    pub fn clamped(&self) -> u64 {
        self.clamped
    }

    pub fn avg_advantage(&self) -> f64 {
        avg_advantage(self)
    }

    /// Batch-means standard error of [`Self::avg_advantage`].
    pub fn avg_advantage_se(&self) -> f64 {
        self.avg_advantage_se
    }

    pub fn advantage_at(&self, alpha: f64) -> Result<f64, CurveError> {
        advantage_at(self, alpha)
    }

    pub fn beta_at(&self, alpha: f64) -> Result<f64, CurveError> {
        self.interpolate(alpha, |p| p.beta)
    }

    pub fn beta_se_at(&self, alpha: f64) -> Result<f64, CurveError> {
        self.interpolate(alpha, |p| p.beta_se)
    }

    fn interpolate(&self, alpha: f64, field: impl Fn(&CurvePoint) -> f64) -> Result<f64, CurveError> {
        let first = self.points[0];
        let last = self.points[self.points.len() - 1];
        if !(alpha >= first.alpha && alpha <= last.alpha) {
            return Err(CurveError::OutOfRange {
                alpha,
                lo: first.alpha,
                hi: last.alpha,
            });
        }
        let idx = self.points.partition_point(|p| p.alpha < alpha);
        let hi = self.points[idx];
        if hi.alpha == alpha || idx == 0 {
            return Ok(field(&hi));
        }
        let lo = self.points[idx - 1];
        let w = (alpha - lo.alpha) / (hi.alpha - lo.alpha);
        Ok(field(&lo) + w * (field(&hi) - field(&lo)))
    }
}

/// Trapezoidal integral of `α − β_α` over the stored grid.
pub fn avg_advantage(curve: &TradeoffCurve) -> f64 {
    trapezoid_advantage(curve.points.iter().map(|p| (p.alpha, p.beta)))
}

pub(crate) fn trapezoid_advantage(points: impl Iterator<Item = (f64, f64)>) -> f64 {
    let mut total = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (a, b) in points {
        if let Some((pa, pb)) = prev {
            total += 0.5 * ((pa - pb) + (a - b)) * (a - pa);
        }
        prev = Some((a, b));
    }
    total
}

/// `α − β_α` with β linearly interpolated between grid points.
pub fn advantage_at(curve: &TradeoffCurve, alpha: f64) -> Result<f64, CurveError> {
    Ok(alpha - curve.beta_at(alpha)?)
}

/// `n` uniform interior points `i/(n+1)`.
pub fn uniform_alpha_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(f: impl Fn(f64) -> f64, n: usize) -> TradeoffCurve {
        let pts = uniform_alpha_grid(n)
            .into_iter()
            .map(|a| CurvePoint {
                alpha: a,
                beta: f(a),
                beta_se: 0.0,
            })
            .collect();
        TradeoffCurve::new(pts, CurveSource::LowerBound).unwrap()
    }

    #[test]
    fn diagonal_has_no_advantage() {
        let c = curve(|a| a, 999);
        assert!(avg_advantage(&c).abs() < 1e-15);
        assert!(advantage_at(&c, 0.999).unwrap().abs() < 1e-15);
    }

    #[test]
    fn perfect_attacker_averages_one_half() {
        let pts = (0..=1000)
            .map(|i| CurvePoint {
                alpha: i as f64 / 1000.0,
                beta: 0.0,
                beta_se: 0.0,
            })
            .collect();
        let c = TradeoffCurve::new(pts, CurveSource::LowerBound).unwrap();
        assert!((avg_advantage(&c) - 0.5).abs() < 1e-12);
        assert!((avg_advantage(&curve(|_| 0.0, 999)) - 0.499).abs() < 1e-12);
    }

    #[test]
    fn extrapolation_is_rejected() {
        let c = curve(|a| a, 9);
        assert!(matches!(c.advantage_at(0.95), Err(CurveError::OutOfRange { .. })));
        assert!(c.advantage_at(0.05).is_err());
        assert!(c.advantage_at(0.5).is_ok());
    }

    #[test]
    fn interpolation_is_linear() {
        let c = curve(|a| a * a, 9);
        let b = c.beta_at(0.15).unwrap();
        assert!((b - 0.5 * (0.01 + 0.04)).abs() < 1e-15);
    }

    #[test]
    fn frontier_cleanup_makes_beta_monotone() {
        let pts = vec![
            CurvePoint { alpha: 0.1, beta: 0.2, beta_se: 0.0 },
            CurvePoint { alpha: 0.2, beta: 0.1, beta_se: 0.0 },
            CurvePoint { alpha: 0.3, beta: 1.4, beta_se: 0.0 },
        ];
        let c = TradeoffCurve::new(pts, CurveSource::LowerBound).unwrap();
        let betas: Vec<f64> = c.points().iter().map(|p| p.beta).collect();
        assert_eq!(betas, vec![0.2, 0.2, 1.0]);
    }

    #[test]
    fn unsorted_alphas_rejected() {
        let pts = vec![
            CurvePoint { alpha: 0.3, beta: 0.2, beta_se: 0.0 },
            CurvePoint { alpha: 0.2, beta: 0.1, beta_se: 0.0 },
        ];
        assert!(TradeoffCurve::new(pts, CurveSource::LowerBound).is_err());
    }
}
