//! Total-variation contraction of the randomized thresholding channel.
//!
//! The channel includes label k in the decision set with probability
//! `σ_T(p_k − q)`; `T = 0` is the hard indicator `p_k ≥ q`. The factor
//! `δ_{T,q}` is the square root of the largest TV distance between the
//! channel outputs of any two probability vectors.

use serde::Serialize;

use super::BoundsError;

/// Largest class count handled by exact outcome enumeration.
pub const MAX_ENUM_CLASSES: usize = 16;

const MIX_GRID: usize = 200;
const REFINE_ITERATIONS: usize = 200;
const K2_GRID: usize = 1000;

/// Element-wise thresholding with temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdChannel {
    pub q: f64,
    pub temperature: f64,
}

impl ThresholdChannel {
    pub fn new(q: f64, temperature: f64) -> Result<Self, BoundsError> {
        if !(0.0..=1.0).contains(&q) {
            return Err(BoundsError::Threshold(format!("q={q} must lie in [0, 1]")));
        }
        if !(temperature >= 0.0) || temperature.is_nan() {
            return Err(BoundsError::Threshold(format!(
                "temperature={temperature} must be ≥ 0"
            )));
        }
        Ok(Self { q, temperature })
    }

    /// Probability that a label with confidence `p` enters the set.
    #[inline]
    pub fn include_prob(&self, p: f64) -> f64 {
        let x = p - self.q;
        if self.temperature == 0.0 {
            if x >= 0.0 {
                1.0
            } else {
                0.0
            }
        } else if self.temperature.is_infinite() {
            0.5
        } else {
            1.0 / (1.0 + (-x / self.temperature).exp())
        }
    }

    pub fn include_probs(&self, p: &[f64]) -> Vec<f64> {
        p.iter().map(|&x| self.include_prob(x)).collect()
    }
}

/// TV distance between two products of independent Bernoullis with success
/// probabilities `u` and `v`, by exact enumeration.
pub fn tv_product_bernoulli(u: &[f64], v: &[f64]) -> Result<f64, BoundsError> {
    if u.len() != v.len() {
        return Err(BoundsError::Length {
            left: u.len(),
            right: v.len(),
        });
    }
    if u.len() > MAX_ENUM_CLASSES {
        return Err(BoundsError::TooManyClasses {
            k: u.len(),
            max: MAX_ENUM_CLASSES,
        });
    }
    if let Some(bad) = u.iter().chain(v).find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(BoundsError::Threshold(format!(
            "Bernoulli parameter {bad} outside [0, 1]"
        )));
    }
    Ok(tv_grouped(u, v))
}

/// Coordinates with `u_k = v_k` factor out of the TV distance; coordinates
/// sharing the same `(u_k, v_k)` pair collapse to a binomial count.
fn tv_grouped(u: &[f64], v: &[f64]) -> f64 {
    let mut groups: Vec<(f64, f64, usize)> = Vec::new();
    for (&a, &b) in u.iter().zip(v) {
        if a == b {
            continue;
        }
        match groups.iter_mut().find(|g| g.0 == a && g.1 == b) {
            Some(g) => g.2 += 1,
            None => groups.push((a, b, 1)),
        }
    }
    if groups.is_empty() {
        return 0.0;
    }
    let pmf = |p: f64, m: usize| -> Vec<f64> {
        (0..=m)
            .map(|c| binomial(m, c) * p.powi(c as i32) * (1.0 - p).powi((m - c) as i32))
            .collect()
    };
    let pa: Vec<Vec<f64>> = groups.iter().map(|g| pmf(g.0, g.2)).collect();
    let pb: Vec<Vec<f64>> = groups.iter().map(|g| pmf(g.1, g.2)).collect();
    let mut counts = vec![0usize; groups.len()];
    let mut total = 0.0;
    loop {
        let mut x = 1.0;
        let mut y = 1.0;
        for (g, &c) in counts.iter().enumerate() {
            x *= pa[g][c];
            y *= pb[g][c];
        }
        total += (x - y).abs();
        let mut g = 0;
        loop {
            if g == counts.len() {
                return (0.5 * total).min(1.0);
            }
            counts[g] += 1;
            if counts[g] <= groups[g].2 {
                break;
            }
            counts[g] = 0;
            g += 1;
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// The maximizing value of `δ_{T,q}` and where it was found.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaFactor {
    /// `√(max TV)`.
    pub value: f64,
    pub tv: f64,
    pub p: Vec<f64>,
    pub p_prime: Vec<f64>,
}

fn one_hot(k: usize, i: usize) -> Vec<f64> {
    let mut p = vec![0.0; k];
    p[i] = 1.0;
    p
}

fn mixture(k: usize, i: usize, j: usize, t: f64) -> Vec<f64> {
    let mut p = vec![0.0; k];
    p[i] = t;
    p[j] = 1.0 - t;
    p
}

fn mixtures(k: usize, i: usize, j: usize, out: &mut Vec<Vec<f64>>) {
    if i < k && j < k {
        out.extend((0..=MIX_GRID).map(|s| mixture(k, i, j, s as f64 / MIX_GRID as f64)));
    }
}

/// Candidate pairs up to a simultaneous relabelling of classes: the first
/// vector is put in canonical position (e_0, uniform, or a mixture of
/// e_0 and e_1) and the second ranges over every relative placement.
fn candidates(k: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let uniform = vec![1.0 / k as f64; k];
    let mut first = vec![one_hot(k, 0), uniform.clone()];
    mixtures(k, 0, 1, &mut first);
    let mut second: Vec<Vec<f64>> = (0..k.min(3)).map(|i| one_hot(k, i)).collect();
    second.push(uniform);
    mixtures(k, 0, 1, &mut second);
    mixtures(k, 0, 2, &mut second);
    mixtures(k, 1, 2, &mut second);
    mixtures(k, 2, 3, &mut second);
    (first, second)
}

struct Best {
    tv: f64,
    p: Vec<f64>,
    p_prime: Vec<f64>,
}

impl Best {
    fn offer(&mut self, tv: f64, p: &[f64], p_prime: &[f64]) {
        if tv > self.tv {
            self.tv = tv;
            self.p = p.to_vec();
            self.p_prime = p_prime.to_vec();
        }
    }
}

/// Computes `δ_{T,q}` for `k` classes.
///
/// Structured candidates (one-hot, uniform, two-point mixtures) seed a
/// coordinate-wise golden-section refinement on each simplex; for `k = 2` an
/// exhaustive grid of step 1e-3 is added. Global optimality is not
/// guaranteed for `k > 2`.
pub fn delta_factor(temperature: f64, q: f64, k: usize) -> Result<DeltaFactor, BoundsError> {
    let channel = ThresholdChannel::new(q, temperature)?;
    if k < 2 {
        return Err(BoundsError::Threshold(format!("need K ≥ 2, got {k}")));
    }
    if k > MAX_ENUM_CLASSES {
        return Err(BoundsError::TooManyClasses {
            k,
            max: MAX_ENUM_CLASSES,
        });
    }
    let tv = |p: &[f64], pp: &[f64]| tv_grouped(&channel.include_probs(p), &channel.include_probs(pp));

    let (first, second) = candidates(k);
    let second_probs: Vec<Vec<f64>> = second.iter().map(|p| channel.include_probs(p)).collect();
    let mut best = Best {
        tv: -1.0,
        p: first[0].clone(),
        p_prime: first[0].clone(),
    };
    for p in &first {
        let u = channel.include_probs(p);
        for (pp, v) in second.iter().zip(&second_probs) {
            best.offer(tv_grouped(&u, v), p, pp);
        }
    }

    if k == 2 {
        let probs: Vec<Vec<f64>> = (0..=K2_GRID)
            .map(|i| {
                let x = i as f64 / K2_GRID as f64;
                channel.include_probs(&[x, 1.0 - x])
            })
            .collect();
        for (i, u) in probs.iter().enumerate() {
            for (j, v) in probs.iter().enumerate() {
                let t = tv_grouped(u, v);
                if t > best.tv {
                    let x = i as f64 / K2_GRID as f64;
                    let y = j as f64 / K2_GRID as f64;
                    best.offer(t, &[x, 1.0 - x], &[y, 1.0 - y]);
                }
            }
        }
    }

    refine(&mut best, k, &tv);
    let tv_max = best.tv.clamp(0.0, 1.0);
    Ok(DeltaFactor {
        value: tv_max.sqrt(),
        tv: tv_max,
        p: best.p,
        p_prime: best.p_prime,
    })
}

fn refine(best: &mut Best, k: usize, tv: &impl Fn(&[f64], &[f64]) -> f64) {
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|a| ((a + 1)..k).map(move |b| (a, b)))
        .collect();
    let mut p = best.p.clone();
    let mut pp = best.p_prime.clone();
    let mut current = best.tv;
    for iter in 0..REFINE_ITERATIONS {
        let (a, b) = pairs[(iter / 2) % pairs.len()];
        let moving_first = iter % 2 == 0;
        let base = if moving_first { p.clone() } else { pp.clone() };
        // Move mass t from coordinate b to coordinate a.
        let lo = -base[a];
        let hi = base[b];
        if hi - lo <= 0.0 {
            continue;
        }
        let eval = |t: f64| {
            let mut x = base.clone();
            x[a] += t;
            x[b] -= t;
            x[a] = x[a].clamp(0.0, 1.0);
            x[b] = x[b].clamp(0.0, 1.0);
            let value = if moving_first { tv(&x, &pp) } else { tv(&p, &x) };
            (value, x)
        };
        let t = golden_section_max(|t| eval(t).0, lo, hi);
        let mut trial = vec![eval(t), eval(lo), eval(hi)];
        trial.sort_by(|x, y| y.0.total_cmp(&x.0));
        let (value, x) = trial.swap_remove(0);
        if value > current {
            current = value;
            if moving_first {
                p = x;
            } else {
                pp = x;
            }
            best.offer(value, &p, &pp);
        }
    }
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..60 {
        if hi - lo <= 1e-12 {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        x1
    } else {
        x2
    }
}
