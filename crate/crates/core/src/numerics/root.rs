use super::NumericsError;

pub const MAX_BISECT_ITERATIONS: usize = 200;

/// Bisection on a bracketing interval. Returns the final `(lo, hi)` bracket,
/// with `f(lo)` and `f(hi)` keeping the signs they had at the start.
///
/// Infinite function values are allowed at the ends, which is convenient for
/// divergences that blow up at the boundary.
pub fn bisect_bracket<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64), NumericsError>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) || !(lo <= hi) {
        return Err(NumericsError::Bracket { lo, hi });
    }
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo.is_nan() || f_hi.is_nan() {
        return Err(NumericsError::Bracket { lo, hi });
    }
    if f_lo == 0.0 {
        return Ok((lo, lo));
    }
    if f_hi == 0.0 {
        return Ok((hi, hi));
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(NumericsError::Bracket { lo, hi });
    }
    let lo_negative = f_lo < 0.0;
    for _ in 0..MAX_BISECT_ITERATIONS {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok((mid, mid));
        }
        if (f_mid < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Root of a monotone function bracketed by `[lo, hi]`, to interval width `tol`.
pub fn bisect<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    let (a, b) = bisect_bracket(f, lo, hi, tol)?;
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::binary_kl;

    #[test]
    fn linear_root() {
        let x = bisect(|x| x - 0.25, 0.0, 1.0, 1e-10).unwrap();
        assert!((x - 0.25).abs() <= 1e-10);
    }

    #[test]
    fn no_sign_change_is_an_error() {
        let err = bisect(|x| x * x, 1.0, 2.0, 1e-10).unwrap_err();
        assert!(matches!(err, NumericsError::Bracket { .. }));
    }

    #[test]
    fn binary_kl_inversion_matches_grid_scan() {
        let f = |x: f64| binary_kl(0.9, x).unwrap() - 0.5;
        let root = bisect(f, 1e-12, 0.9, 1e-10).unwrap();
        assert!(root < 0.9);
        // Dense scan: last grid point where the divergence still exceeds 0.5.
        let n = 900_000;
        let mut crossing = None;
        for i in 1..n {
            let x = 0.9 * i as f64 / n as f64;
            if f(x) <= 0.0 {
                crossing = Some(x);
                break;
            }
        }
        let crossing = crossing.unwrap();
        assert!((root - crossing).abs() <= 0.9 / n as f64 + 1e-10);
    }

    #[test]
    fn infinite_endpoint_is_accepted() {
        let (lo, hi) = bisect_bracket(|x| binary_kl(0.5, x).unwrap() - 0.1, 0.0, 0.5, 1e-12).unwrap();
        assert!(hi - lo <= 1e-12);
        assert!(binary_kl(0.5, hi).unwrap() <= 0.1);
    }
}
