//! ROC construction for the likelihood-ratio test that declares "out" when
//! the LLR is large. α is the out-hypothesis acceptance rate and β the
//! in-hypothesis acceptance rate; randomizing at the boundary makes β a
//! piecewise-linear function of α through the vertices built here.

use std::cmp::Ordering;

/// β at each α, by linear interpolation through ROC vertices sorted by α
/// that start at (0, 0) and end at (1, 1). Vertical runs resolve to their
/// lowest β.
pub(crate) fn beta_on_grid(vertices: &[(f64, f64)], alphas: &[f64]) -> Vec<f64> {
    alphas
        .iter()
        .map(|&a| {
            let idx = vertices.partition_point(|v| v.0 < a);
            if idx >= vertices.len() {
                return 1.0;
            }
            let hi = vertices[idx];
            if hi.0 == a || idx == 0 {
                return hi.1;
            }
            let lo = vertices[idx - 1];
            lo.1 + (a - lo.0) / (hi.0 - lo.0) * (hi.1 - lo.1)
        })
        .collect()
}

/// β at each α from ascending-sorted LLR samples. The ROC vertices sit at
/// the distinct out values `v`: `α(v)` and `β(v)` are the out and in
/// fractions at or above `v`, starting from (0, 0). Between vertices the
/// boundary group is included at random, so β is linear in α there.
pub(crate) fn beta_from_samples(out_sorted: &[f64], in_sorted: &[f64], alphas: &[f64]) -> Vec<f64> {
    let n_out = out_sorted.len();
    let n_in = in_sorted.len() as f64;
    let in_at_least = |v: f64| (in_sorted.len() - in_sorted.partition_point(|&x| x < v)) as f64 / n_in;
    alphas
        .iter()
        .map(|&a| {
            let pos = a * n_out as f64;
            let j = (pos.ceil() as usize).clamp(1, n_out);
            let v = out_sorted[n_out - j];
            let below_or_at = out_sorted.partition_point(|&x| x <= v);
            let n_ge = (n_out - out_sorted.partition_point(|&x| x < v)) as f64;
            let n_gt = (n_out - below_or_at) as f64;
            let beta_hi = in_at_least(v);
            let beta_lo = if below_or_at < n_out {
                in_at_least(out_sorted[below_or_at])
            } else {
                0.0
            };
            let w = ((pos - n_gt) / (n_ge - n_gt)).clamp(0.0, 1.0);
            beta_lo + w * (beta_hi - beta_lo)
        })
        .collect()
}

/// Discrete-outcome ROC: outcomes are ranked by `rank_out/rank_in`
/// (descending) and accumulated with weights `eval_out`, `eval_in`. Tied
/// ranks are accumulated as one step. Outcomes with zero mass in both
/// ranking pmfs go last.
pub(crate) fn discrete_vertices(
    rank_out: &[f64],
    rank_in: &[f64],
    eval_out: &[f64],
    eval_in: &[f64],
) -> Vec<(f64, f64)> {
    let key = |i: usize| -> f64 {
        let (a, b) = (rank_out[i], rank_in[i]);
        match (a > 0.0, b > 0.0) {
            (true, true) => a.ln() - b.ln(),
            (true, false) => f64::INFINITY,
            (false, true) => f64::NEG_INFINITY,
            (false, false) => f64::NAN,
        }
    };
    let keys: Vec<f64> = (0..rank_out.len()).map(key).collect();
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&i, &j| match (keys[i].is_nan(), keys[j].is_nan()) {
        (false, false) => keys[j].total_cmp(&keys[i]).then(i.cmp(&j)),
        (true, true) => i.cmp(&j),
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
    });
    let total_out: f64 = eval_out.iter().sum();
    let total_in: f64 = eval_in.iter().sum();
    let mut vertices = Vec::with_capacity(order.len() + 1);
    vertices.push((0.0, 0.0));
    let (mut a, mut b) = (0.0, 0.0);
    for (pos, &i) in order.iter().enumerate() {
        a += eval_out[i];
        b += eval_in[i];
        let next_same = order
            .get(pos + 1)
            .is_some_and(|&j| keys[j] == keys[i] || (keys[j].is_nan() && keys[i].is_nan()));
        if !next_same {
            vertices.push(((a / total_out).min(1.0), (b / total_in).min(1.0)));
        }
    }
    if let Some(last) = vertices.last_mut() {
        *last = (1.0, 1.0);
    }
    vertices
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_give_diagonal() {
        let x: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let betas = beta_from_samples(&x, &x, &[0.1, 0.25, 0.5, 0.999]);
        for (b, a) in betas.iter().zip([0.1, 0.25, 0.5, 0.999]) {
            assert!((b - a).abs() < 1e-12, "{b} vs {a}");
        }
    }

    #[test]
    fn tied_samples_are_randomized() {
        let zeros = vec![0.0; 1000];
        let betas = beta_from_samples(&zeros, &zeros, &[0.01, 0.5, 0.999]);
        for (b, a) in betas.iter().zip([0.01, 0.5, 0.999]) {
            assert!((b - a).abs() < 1e-12, "{b} vs {a}");
        }
    }

    #[test]
    fn separated_samples_give_zero_beta() {
        let out: Vec<f64> = (0..100).map(|i| 10.0 + i as f64).collect();
        let inn: Vec<f64> = (0..100).map(|i| -10.0 - i as f64).collect();
        let mut inn_sorted = inn.clone();
        inn_sorted.sort_by(f64::total_cmp);
        let betas = beta_from_samples(&out, &inn_sorted, &[0.5, 0.99]);
        assert_eq!(betas, vec![0.0, 0.0]);
    }

    #[test]
    fn discrete_roc_interpolates_boundary_outcome() {
        // Two outcomes: a has LLR ln(0.8/0.2) > 0, b has ln(0.2/0.8).
        let out = [0.8, 0.2];
        let inn = [0.2, 0.8];
        let v = discrete_vertices(&out, &inn, &out, &inn);
        assert_eq!(v, vec![(0.0, 0.0), (0.8, 0.2), (1.0, 1.0)]);
        let b = beta_on_grid(&v, &[0.4, 0.8, 0.9]);
        assert!((b[0] - 0.1).abs() < 1e-15);
        assert!((b[1] - 0.2).abs() < 1e-15);
        assert!((b[2] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn ties_form_one_step() {
        let out = [0.25, 0.25, 0.5];
        let inn = [0.25, 0.25, 0.5];
        let v = discrete_vertices(&out, &inn, &out, &inn);
        assert_eq!(v, vec![(0.0, 0.0), (1.0, 1.0)]);
    }

    #[test]
    fn zero_mass_outcomes_go_last() {
        let out = [0.0, 1.0, 0.0];
        let inn = [0.0, 0.5, 0.5];
        let v = discrete_vertices(&out, &inn, &out, &inn);
        assert_eq!(v[1], (1.0, 0.5));
        assert_eq!(*v.last().unwrap(), (1.0, 1.0));
    }
}
