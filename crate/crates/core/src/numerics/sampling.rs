use rand_distr::{Distribution, Gamma};

use super::{NumericsError, RngStream};

/// Unit-scale Gamma sampler.
///
/// Shapes below one use the boost `G(a) = G(a+1)·U^(1/a)`, carried out in log
/// space so that tiny shapes do not underflow to zero.
#[derive(Clone, Debug)]
pub struct GammaSampler {
    shape: f64,
    inner: Gamma<f64>,
    boosted: bool,
}

impl GammaSampler {
    pub fn new(shape: f64) -> Result<Self, NumericsError> {
        if !(shape.is_finite() && shape > 0.0) {
            return Err(NumericsError::Domain {
                function: "sample_gamma",
                value: shape,
            });
        }
        let boosted = shape < 1.0;
        let base = if boosted { shape + 1.0 } else { shape };
        let inner = Gamma::new(base, 1.0).map_err(|_| NumericsError::Domain {
            function: "sample_gamma",
            value: shape,
        })?;
        Ok(Self {
            shape,
            inner,
            boosted,
        })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        if self.boosted {
            self.sample_ln(rng).exp()
        } else {
            self.inner.sample(rng)
        }
    }

    /// Natural log of a Gamma draw.
    pub fn sample_ln(&self, rng: &mut RngStream) -> f64 {
        let g = self.inner.sample(rng);
        if self.boosted {
            g.ln() + rng.open01().ln() / self.shape
        } else {
            g.ln()
        }
    }
}

/// Draws one Gamma(shape, 1) variate.
pub fn sample_gamma(shape: f64, rng: &mut RngStream) -> Result<f64, NumericsError> {
    Ok(GammaSampler::new(shape)?.sample(rng))
}

/// Dirichlet sampler built from independent Gamma draws.
#[derive(Clone, Debug)]
pub struct DirichletSampler {
    components: Vec<GammaSampler>,
    log_space: bool,
}

impl DirichletSampler {
    pub fn new(gamma: &[f64]) -> Result<Self, NumericsError> {
        if gamma.len() < 2 {
            return Err(NumericsError::Length {
                expected: 2,
                got: gamma.len(),
            });
        }
        let components = gamma
            .iter()
            .map(|&g| GammaSampler::new(g))
            .collect::<Result<Vec<_>, _>>()?;
        let log_space = gamma.iter().any(|&g| g < 1.0);
        Ok(Self {
            components,
            log_space,
        })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// Writes one draw into `out` (length must equal `dim()`).
    pub fn sample_into(&self, rng: &mut RngStream, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.components.len());
        if self.log_space {
            let mut max = f64::NEG_INFINITY;
            for (slot, c) in out.iter_mut().zip(&self.components) {
                *slot = c.sample_ln(rng);
                max = max.max(*slot);
            }
            let mut sum = 0.0;
            for slot in out.iter_mut() {
                *slot = (*slot - max).exp();
                sum += *slot;
            }
            for slot in out.iter_mut() {
                *slot /= sum;
            }
        } else {
            let mut sum = 0.0;
            for (slot, c) in out.iter_mut().zip(&self.components) {
                *slot = c.sample(rng);
                sum += *slot;
            }
            for slot in out.iter_mut() {
                *slot /= sum;
            }
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.sample_into(rng, &mut out);
        out
    }
}

/// Draws one probability vector from Dirichlet(`gamma`).
pub fn sample_dirichlet(gamma: &[f64], rng: &mut RngStream) -> Result<Vec<f64>, NumericsError> {
    Ok(DirichletSampler::new(gamma)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn exponential_special_case() {
        let mut rng = RngStream::new(1, 0);
        let s = GammaSampler::new(1.0).unwrap();
        let xs: Vec<f64> = (0..1_000_000).map(|_| s.sample(&mut rng)).collect();
        let (mean, _) = moments(&xs);
        assert!((mean - 1.0).abs() < 0.003, "mean {mean}");
    }

    #[test]
    fn gamma_moments_within_three_standard_errors() {
        let n = 1_000_000;
        for (i, shape) in [0.2, 0.7, 2.5, 30.0].into_iter().enumerate() {
            let mut rng = RngStream::new(7, i as u64);
            let s = GammaSampler::new(shape).unwrap();
            let xs: Vec<f64> = (0..n).map(|_| s.sample(&mut rng)).collect();
            assert!(xs.iter().all(|&x| x > 0.0));
            let (mean, var) = moments(&xs);
            // Var of the sample mean is shape/n; Var of the sample variance
            // for Gamma is (μ4 - σ⁴)/n with μ4 = 3a² + 6a.
            let se_mean = (shape / n as f64).sqrt();
            let se_var = ((3.0 * shape * shape + 6.0 * shape - shape * shape) / n as f64).sqrt();
            assert!((mean - shape).abs() < 3.0 * se_mean, "shape {shape}: mean {mean}");
            assert!((var - shape).abs() < 3.0 * se_var, "shape {shape}: var {var}");
        }
    }

    #[test]
    fn gamma_rejects_bad_shape() {
        let mut rng = RngStream::new(0, 0);
        assert!(sample_gamma(0.0, &mut rng).is_err());
        assert!(sample_gamma(-1.0, &mut rng).is_err());
        assert!(sample_gamma(f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn dirichlet_normalized_and_mean_matches() {
        let mut gamma = vec![2.0];
        gamma.extend(std::iter::repeat_n(2.0 / 9.0, 9));
        let s = DirichletSampler::new(&gamma).unwrap();
        let mut rng = RngStream::new(3, 0);
        let n = 1_000_000;
        let total: f64 = gamma.iter().sum();
        let mut first = Vec::with_capacity(n);
        let mut p = vec![0.0; gamma.len()];
        for _ in 0..n {
            s.sample_into(&mut rng, &mut p);
            let sum: f64 = p.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-12);
            assert!(p.iter().all(|&x| x >= 0.0));
            first.push(p[0]);
        }
        let (mean, var) = moments(&first);
        let m = gamma[0] / total;
        let v = gamma[0] * (total - gamma[0]) / (total * total * (total + 1.0));
        assert!((m - 0.5).abs() < 1e-12);
        assert!((mean - m).abs() < 3.0 * (v / n as f64).sqrt(), "mean {mean}");
        // Sample variance of a bounded variable: SE ≈ sqrt((μ4 - v²)/n); bound μ4 by v·(max dev)².
        let mu4 = first.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n as f64;
        let se_var = ((mu4 - var * var) / n as f64).sqrt();
        assert!((var - v).abs() < 5.0 * se_var, "var {var} vs {v}");
    }

    #[test]
    fn symmetric_dirichlet_mean_half() {
        let s = DirichletSampler::new(&[1.0, 1.0]).unwrap();
        let mut rng = RngStream::new(11, 0);
        let n = 1_000_000;
        let mean = (0..n).map(|_| s.sample(&mut rng)[0]).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 3.0 * (1.0 / 12.0 / n as f64).sqrt());
    }

    #[test]
    fn tiny_shapes_do_not_underflow() {
        let s = DirichletSampler::new(&[0.01, 0.01, 0.01]).unwrap();
        let mut rng = RngStream::new(5, 0);
        for _ in 0..10_000 {
            let p = s.sample(&mut rng);
            assert!(p.iter().all(|x| x.is_finite()));
            assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn identical_streams_bit_identical_samples() {
        let gamma = [0.3, 1.7, 4.0];
        let mut a = RngStream::new(9, 2);
        let mut b = RngStream::new(9, 2);
        for _ in 0..1000 {
            let x = sample_dirichlet(&gamma, &mut a).unwrap();
            let y = sample_dirichlet(&gamma, &mut b).unwrap();
            assert!(x.iter().zip(&y).all(|(u, v)| u.to_bits() == v.to_bits()));
        }
    }
}
