use serde::Serialize;

use super::roc::{beta_on_grid, discrete_vertices};
use super::simulate::{check_alphas, run_tasks};
use super::{DisclosureMode, SimError, BATCHES, MIN_MC};
use crate::bounds::{BoundsError, ThresholdChannel, MAX_ENUM_CLASSES};
use crate::curve::{CurvePoint, CurveSource, TradeoffCurve};
use crate::numerics::RngStream;
use crate::uncertainty::DirichletPair;

/// Outcome pmfs of the decision-set channel under both hypotheses. Outcome
/// `b` includes label `k` iff bit `k` of `b` is set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DsPmfPair {
    pub k: usize,
    pub q: f64,
    pub temperature: f64,
    pub n_mc: usize,
    pub seed: u64,
    pub stream_id: u64,
    pub pmf_out: Vec<f64>,
    pub pmf_in: Vec<f64>,
}

impl DsPmfPair {
    /// Inclusion pattern of outcome `index`.
    pub fn outcome(&self, index: usize) -> Vec<bool> {
        (0..self.k).map(|bit| (index >> bit) & 1 == 1).collect()
    }

    pub fn mode(&self) -> DisclosureMode {
        DisclosureMode::Ds {
            q: self.q,
            temperature: self.temperature,
        }
    }
}

/// Accumulates `Σ_i P(outcome | p^{(i)})` over confidence vectors.
#[derive(Debug, Clone)]
pub(crate) struct DsAccumulator {
    channel: ThresholdChannel,
    sums: Vec<f64>,
    scratch: Vec<f64>,
    incl: Vec<f64>,
}

impl DsAccumulator {
    pub(crate) fn new(k: usize, q: f64, temperature: f64) -> Result<Self, SimError> {
        if k > MAX_ENUM_CLASSES {
            return Err(BoundsError::TooManyClasses {
                k,
                max: MAX_ENUM_CLASSES,
            }
            .into());
        }
        Ok(Self {
            channel: ThresholdChannel::new(q, temperature)?,
            sums: vec![0.0; 1 << k],
            scratch: vec![0.0; 1 << k],
            incl: vec![0.0; k],
        })
    }

    #[inline]
    pub(crate) fn add(&mut self, p: &[f64]) {
        if self.channel.temperature == 0.0 {
            let idx = p
                .iter()
                .enumerate()
                .fold(0usize, |acc, (k, &x)| acc | (usize::from(x >= self.channel.q) << k));
            self.sums[idx] += 1.0;
            return;
        }
        for (s, &x) in self.incl.iter_mut().zip(p) {
            *s = self.channel.include_prob(x);
        }
        let w = &mut self.scratch;
        w[0] = 1.0;
        let mut len = 1;
        for &s in &self.incl {
            for j in 0..len {
                w[j + len] = w[j] * s;
                w[j] *= 1.0 - s;
            }
            len <<= 1;
        }
        for (acc, &x) in self.sums.iter_mut().zip(w.iter()) {
            *acc += x;
        }
    }

    pub(crate) fn into_sums(self) -> Vec<f64> {
        self.sums
    }
}

/// Estimates the decision-set outcome pmfs under both hypotheses by
/// averaging conditional outcome probabilities over `n_mc` Dirichlet draws
/// per hypothesis.
pub fn ds_pmfs(
    pair: &DirichletPair,
    mode: &DisclosureMode,
    n_mc: usize,
    rng: &RngStream,
) -> Result<DsPmfPair, SimError> {
    let DisclosureMode::Ds { q, temperature } = *mode else {
        return Err(SimError::Invalid(format!("ds_pmfs needs a DS mode, got {mode}")));
    };
    mode.validate()?;
    if n_mc < MIN_MC {
        return Err(SimError::Invalid(format!("n_mc={n_mc} is below the minimum {MIN_MC}")));
    }
    let tasks = run_tasks(pair, std::slice::from_ref(mode), n_mc, rng)?;
    let k = pair.k();
    let mut pmf_out = vec![0.0; 1 << k];
    let mut pmf_in = vec![0.0; 1 << k];
    for (t, task) in tasks.iter().enumerate() {
        let target = if t % 2 == 0 { &mut pmf_out } else { &mut pmf_in };
        for (acc, x) in target.iter_mut().zip(&task.ds[0]) {
            *acc += x;
        }
    }
    for pmf in [&mut pmf_out, &mut pmf_in] {
        for x in pmf.iter_mut() {
            *x /= n_mc as f64;
        }
    }
    Ok(DsPmfPair {
        k,
        q,
        temperature,
        n_mc,
        seed: rng.seed(),
        stream_id: rng.stream_id(),
        pmf_out,
        pmf_in,
    })
}

/// Likelihood-ratio ROC of the discrete channel, ranking outcomes by the
/// same pmfs that weight them.
pub fn exact_roc(pmfs: &DsPmfPair, alphas: &[f64]) -> Result<TradeoffCurve, SimError> {
    check_alphas(alphas)?;
    let vertices = discrete_vertices(&pmfs.pmf_out, &pmfs.pmf_in, &pmfs.pmf_out, &pmfs.pmf_in);
    let betas = beta_on_grid(&vertices, alphas);
    let mut points = Vec::with_capacity(alphas.len() + 2);
    points.push(CurvePoint { alpha: 0.0, beta: 0.0, beta_se: 0.0 });
    points.extend(alphas.iter().zip(betas).map(|(&alpha, beta)| CurvePoint {
        alpha,
        beta,
        beta_se: 0.0,
    }));
    points.push(CurvePoint { alpha: 1.0, beta: 1.0, beta_se: 0.0 });
    let source = CurveSource::Simulated {
        mode: pmfs.mode(),
        n_samples: pmfs.n_mc,
        seed: pmfs.seed,
        stream_id: pmfs.stream_id,
    };
    Ok(TradeoffCurve::new(points, source)?)
}

/// Cross-fitted β per batch: batch `b` is ranked by the pooled sums of the
/// other batches and evaluated on its own sums, so ranking noise never
/// flatters the curve.
pub(crate) fn cross_fitted_betas(
    out_sums: &[&[f64]],
    in_sums: &[&[f64]],
    alphas: &[f64],
) -> Vec<Vec<f64>> {
    debug_assert_eq!(out_sums.len(), BATCHES);
    let total = |sums: &[&[f64]]| -> Vec<f64> {
        let mut acc = vec![0.0; sums[0].len()];
        for s in sums {
            for (a, x) in acc.iter_mut().zip(s.iter()) {
                *a += x;
            }
        }
        acc
    };
    let all_out = total(out_sums);
    let all_in = total(in_sums);
    (0..out_sums.len())
        .map(|b| {
            let rank_out: Vec<f64> = all_out.iter().zip(out_sums[b]).map(|(a, x)| a - x).collect();
            let rank_in: Vec<f64> = all_in.iter().zip(in_sums[b]).map(|(a, x)| a - x).collect();
            let vertices = discrete_vertices(&rank_out, &rank_in, out_sums[b], in_sums[b]);
            beta_on_grid(&vertices, alphas)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::uniform_alpha_grid;
    use crate::uncertainty::{profile_to_pair, UncertaintyProfile};

    fn headline() -> DirichletPair {
        profile_to_pair(&UncertaintyProfile::new(10, 0.2, 0.5, 0.25).unwrap()).unwrap()
    }

    fn ds(q: f64, temperature: f64) -> DisclosureMode {
        DisclosureMode::Ds { q, temperature }
    }

    #[test]
    fn pmfs_are_normalized() {
        for t in [0.0, 0.05] {
            let p = ds_pmfs(&headline(), &ds(0.2, t), 20_000, &RngStream::new(1, 0)).unwrap();
            for pmf in [&p.pmf_out, &p.pmf_in] {
                assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                assert!(pmf.iter().all(|&x| x >= 0.0));
            }
        }
    }

    #[test]
    fn infinite_temperature_is_uniform() {
        let p = ds_pmfs(&headline(), &ds(0.3, f64::INFINITY), 10_000, &RngStream::new(2, 0)).unwrap();
        let u = 1.0 / 1024.0;
        assert!(p.pmf_out.iter().chain(&p.pmf_in).all(|&x| (x - u).abs() < 1e-12));
    }

    #[test]
    fn zero_threshold_includes_everything() {
        let p = ds_pmfs(&headline(), &ds(0.0, 0.0), 10_000, &RngStream::new(3, 0)).unwrap();
        assert_eq!(p.pmf_out[1023], 1.0);
        assert_eq!(p.pmf_in[1023], 1.0);
        assert_eq!(p.outcome(1023), vec![true; 10]);
    }

    #[test]
    fn uniform_simplex_splits_evenly() {
        let pair = DirichletPair::new(vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let n = 100_000;
        let p = ds_pmfs(&pair, &ds(0.5, 0.0), n, &RngStream::new(4, 0)).unwrap();
        let se = (0.25 / n as f64).sqrt();
        assert!((p.pmf_out[0b01] - 0.5).abs() < 3.0 * se);
        assert!((p.pmf_out[0b10] - 0.5).abs() < 3.0 * se);
        assert_eq!(p.pmf_out[0b00] + p.pmf_out[0b11], 0.0);
    }

    #[test]
    fn exact_roc_reproducible_across_seeds() {
        let alphas = uniform_alpha_grid(99);
        let a = exact_roc(&ds_pmfs(&headline(), &ds(0.2, 0.0), 100_000, &RngStream::new(5, 0)).unwrap(), &alphas)
            .unwrap();
        let b = exact_roc(&ds_pmfs(&headline(), &ds(0.2, 0.0), 100_000, &RngStream::new(6, 0)).unwrap(), &alphas)
            .unwrap();
        for (x, y) in a.points().iter().zip(b.points()) {
            assert!((x.beta - y.beta).abs() < 0.01, "α={}: {} vs {}", x.alpha, x.beta, y.beta);
        }
    }

    #[test]
    fn soft_accumulator_matches_enumeration() {
        let mut acc = DsAccumulator::new(3, 0.3, 0.1).unwrap();
        let p = [0.5, 0.2, 0.3];
        acc.add(&p);
        let sums = acc.into_sums();
        let ch = ThresholdChannel::new(0.3, 0.1).unwrap();
        for (idx, &s) in sums.iter().enumerate() {
            let expect: f64 = (0..3)
                .map(|k| {
                    let inc = ch.include_prob(p[k]);
                    if (idx >> k) & 1 == 1 { inc } else { 1.0 - inc }
                })
                .product();
            assert!((s - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_non_ds_modes_and_small_counts() {
        let rng = RngStream::new(0, 0);
        assert!(ds_pmfs(&headline(), &DisclosureMode::Cv, 20_000, &rng).is_err());
        assert!(ds_pmfs(&headline(), &ds(0.2, 0.0), 100, &rng).is_err());
        let big = DirichletPair::new(vec![1.0; 17], vec![1.0; 17]).unwrap();
        assert!(ds_pmfs(&big, &ds(0.2, 0.0), 20_000, &rng).is_err());
    }
}
