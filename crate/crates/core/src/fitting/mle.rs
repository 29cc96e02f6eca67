use serde::Serialize;

use super::{ConfidenceDataset, FitError};
use crate::numerics::{digamma, digamma_inverse, log_multivariate_beta};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub gamma_hat: Vec<f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Largest stationarity residual `|ψ(γ_k) − ψ(Σγ) − mean ln p_k|`.
    pub tolerance_achieved: f64,
    pub warning: Option<String>,
    #[serde(skip)]
    pub log_likelihood_trace: Vec<f64>,
}

/// Sufficient statistics: row count, mean of `ln p_k`, and the mean and
/// variance of the first component.
struct Stats {
    n: usize,
    mean_log: Vec<f64>,
    means: Vec<f64>,
    var0: f64,
    constant_col: Option<usize>,
}

fn stats(rows: &[Vec<f64>], k: usize) -> Result<Stats, FitError> {
    let needed = k + 1;
    if rows.len() < needed {
        return Err(FitError::TooFewRows {
            rows: rows.len(),
            k,
            needed,
        });
    }
    let n = rows.len() as f64;
    let mut mean_log = vec![0.0; k];
    let mut means = vec![0.0; k];
    for (r, row) in rows.iter().enumerate() {
        if row.len() != k {
            return Err(FitError::Invalid(format!("row {r} has {} components, expected {k}", row.len())));
        }
        for (col, &x) in row.iter().enumerate() {
            if !(x > 0.0) {
                return Err(FitError::NonPositive { row: r, col, value: x });
            }
            mean_log[col] += x.ln();
            means[col] += x;
        }
    }
    mean_log.iter_mut().for_each(|x| *x /= n);
    means.iter_mut().for_each(|x| *x /= n);
    let var0 = rows.iter().map(|r| (r[0] - means[0]).powi(2)).sum::<f64>() / n;
    let constant_col = (0..k).find(|&c| rows.iter().all(|r| r[c] == rows[0][c]));
    Ok(Stats {
        n: rows.len(),
        mean_log,
        means,
        var0,
        constant_col,
    })
}

fn log_likelihood(gamma: &[f64], s: &Stats) -> Result<f64, FitError> {
    let cross: f64 = gamma.iter().zip(&s.mean_log).map(|(g, l)| (g - 1.0) * l).sum();
    Ok(s.n as f64 * (cross - log_multivariate_beta(gamma)?))
}

fn residual(gamma: &[f64], s: &Stats) -> Result<f64, FitError> {
    let psi_sum = digamma(gamma.iter().sum())?;
    let mut worst = 0.0f64;
    for (g, l) in gamma.iter().zip(&s.mean_log) {
        worst = worst.max((digamma(*g)? - psi_sum - l).abs());
    }
    Ok(worst)
}

fn fit_stats(s: &Stats, tol: f64, max_iter: usize) -> Result<FitResult, FitError> {
    if !(tol > 0.0) {
        return Err(FitError::Invalid(format!("tolerance {tol} must be positive")));
    }
    // Moment matching on the first component: Var = m(1−m)/(s+1).
    let m0 = s.means[0];
    let mut precision = m0 * (1.0 - m0) / s.var0 - 1.0;
    if !(precision.is_finite() && precision > 0.0) {
        precision = s.means.len() as f64;
    }
    let mut gamma: Vec<f64> = s.means.iter().map(|m| m * precision).collect();

    if let Some(col) = s.constant_col {
        let ll = log_likelihood(&gamma, s)?;
        return Ok(FitResult {
            gamma_hat: gamma,
            log_likelihood: ll,
            iterations: 0,
            converged: false,
            tolerance_achieved: f64::INFINITY,
            warning: Some(format!(
                "component p{col} is constant across rows; the likelihood has no finite maximizer"
            )),
            log_likelihood_trace: vec![ll],
        });
    }

    let mut trace = vec![log_likelihood(&gamma, s)?];
    let mut res = residual(&gamma, s)?;
    let mut iterations = 0;
    while res > tol && iterations < max_iter {
        let psi_sum = digamma(gamma.iter().sum())?;
        for (g, l) in gamma.iter_mut().zip(&s.mean_log) {
            *g = digamma_inverse(psi_sum + l)?;
        }
        iterations += 1;
        trace.push(log_likelihood(&gamma, s)?);
        res = residual(&gamma, s)?;
    }
    let converged = res <= tol;
    Ok(FitResult {
        log_likelihood: *trace.last().expect("trace is never empty"),
        gamma_hat: gamma,
        iterations,
        converged,
        tolerance_achieved: res,
        warning: (!converged).then(|| format!("no convergence after {iterations} iterations (residual {res:.3e})")),
        log_likelihood_trace: trace,
    })
}

/// Dirichlet maximum-likelihood fit by the digamma fixed point
/// `γ_k ← ψ⁻¹(ψ(Σγ) + mean ln p_k)`, started from moment matching.
pub fn fit_dirichlet(data: &ConfidenceDataset, tol: f64, max_iter: usize) -> Result<FitResult, FitError> {
    fit_stats(&stats(&data.rows, data.k)?, tol, max_iter)
}

/// Beta fit to the true-label confidence, returning `(γ_0, Σ_{k≥1} γ_k)`.
pub fn fit_beta_tlc(data: &ConfidenceDataset, tol: f64, max_iter: usize) -> Result<FitResult, FitError> {
    let reduced: Vec<Vec<f64>> = data
        .rows
        .iter()
        .map(|r| vec![r[0], r[1..].iter().sum()])
        .collect();
    let needed = data.k + 1;
    if reduced.len() < needed {
        return Err(FitError::TooFewRows {
            rows: reduced.len(),
            k: data.k,
            needed,
        });
    }
    fit_stats(&stats(&reduced, 2)?, tol, max_iter)
}
