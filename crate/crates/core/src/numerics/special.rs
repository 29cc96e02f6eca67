//! Log-gamma, digamma, trigamma and the helpers built on them.

use std::f64::consts::PI;

use super::NumericsError;

/// Euler–Mascheroni constant, `-ψ(1)`.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Bernoulli numbers B2, B4, ..., B16.
const BERNOULLI: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

const STIRLING_CUTOFF: f64 = 10.0;
const DIGAMMA_CUTOFF: f64 = 6.0;

fn check_positive(name: &'static str, x: f64) -> Result<(), NumericsError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(NumericsError::Domain {
            function: name,
            value: x,
        })
    }
}

/// Natural log of the Gamma function for `x > 0`.
///
/// Shifts the argument above 10 with the recurrence `Γ(x+1) = xΓ(x)` and then
/// evaluates the Stirling series with eight Bernoulli corrections.
pub fn log_gamma(x: f64) -> Result<f64, NumericsError> {
    check_positive("log_gamma", x)?;
    if x == 1.0 || x == 2.0 {
        return Ok(0.0);
    }
    let mut y = x;
    let mut prod = 1.0;
    while y < STIRLING_CUTOFF {
        prod *= y;
        y += 1.0;
    }
    Ok(stirling(y) - prod.ln())
}

fn stirling(y: f64) -> f64 {
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    let mut pow = inv;
    for (n, b) in BERNOULLI.iter().enumerate() {
        let two_n = 2.0 * (n as f64 + 1.0);
        corr += b / (two_n * (two_n - 1.0)) * pow;
        pow *= inv2;
    }
    (y - 0.5) * y.ln() - y + 0.5 * (2.0 * PI).ln() + corr
}

/// Digamma function `ψ(x) = Γ'(x)/Γ(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64, NumericsError> {
    check_positive("digamma", x)?;
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < DIGAMMA_CUTOFF {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let mut series = 0.0;
    let mut pow = inv2;
    for (n, b) in BERNOULLI.iter().enumerate() {
        series += b / (2.0 * (n as f64 + 1.0)) * pow;
        pow *= inv2;
    }
    acc + x.ln() - 0.5 / x - series
}

/// Trigamma function `ψ'(x)` for `x > 0`.
pub fn trigamma(x: f64) -> Result<f64, NumericsError> {
    check_positive("trigamma", x)?;
    Ok(trigamma_unchecked(x))
}

pub(crate) fn trigamma_unchecked(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < DIGAMMA_CUTOFF {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv2 * inv;
    for b in BERNOULLI.iter() {
        series += b * pow;
        pow *= inv2;
    }
    acc + inv + 0.5 * inv2 + series
}

/// Solves `ψ(x) = y` for `x > 0`.
///
/// Starts from `exp(y) + 1/2` (or `-1/(y + γ)` for `y < -2.22`) and polishes
/// with Newton steps on the trigamma derivative.
pub fn digamma_inverse(y: f64) -> Result<f64, NumericsError> {
    if !y.is_finite() {
        return Err(NumericsError::Domain {
            function: "digamma_inverse",
            value: y,
        });
    }
    let mut x = if y >= -2.22 {
        y.exp() + 0.5
    } else {
        -1.0 / (y + EULER_GAMMA)
    };
    for _ in 0..100 {
        let step = (digamma_unchecked(x) - y) / trigamma_unchecked(x);
        let mut next = x - step;
        if next <= 0.0 {
            // Newton overshot the pole at zero.
            next = 0.5 * x;
        }
        let moved = (next - x).abs();
        x = next;
        if moved <= 1e-15 * x {
            break;
        }
    }
    Ok(x)
}

/// `ln B(γ) = Σ ln Γ(γ_k) - ln Γ(Σ γ_k)`.
pub fn log_multivariate_beta(gamma: &[f64]) -> Result<f64, NumericsError> {
    if gamma.len() < 2 {
        return Err(NumericsError::Length {
            expected: 2,
            got: gamma.len(),
        });
    }
    let mut total = 0.0;
    let mut sum = 0.0;
    for &g in gamma {
        total += log_gamma(g)?;
        sum += g;
    }
    Ok(total - log_gamma(sum)?)
}

/// Binary KL divergence `d(a‖b)` in nats, with `0 ln 0 = 0`.
pub fn binary_kl(a: f64, b: f64) -> Result<f64, NumericsError> {
    for v in [a, b] {
        if !(0.0..=1.0).contains(&v) {
            return Err(NumericsError::Domain {
                function: "binary_kl",
                value: v,
            });
        }
    }
    Ok(xlogy_ratio(a, b) + xlogy_ratio(1.0 - a, 1.0 - b))
}

fn xlogy_ratio(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if y == 0.0 {
        f64::INFINITY
    } else {
        x * (x / y).ln()
    }
}
