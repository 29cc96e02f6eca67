use serde::Serialize;

use super::{batch_sizes, mean_and_se, Hypothesis, SimError, BATCHES, MIN_MC};
use crate::bounds::ThresholdChannel;
use crate::exec::map_tasks;
use crate::numerics::{DirichletSampler, RngStream};
use crate::uncertainty::DirichletPair;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SetSize {
    pub mean: f64,
    pub se: f64,
}

/// Expected decision-set size `E[Σ_k σ_T(p_k − q)]` under one hypothesis.
///
/// Uses the same task streams as the simulator, so the draws match those
/// behind a simulated curve with the same `rng`.
pub fn expected_set_size(
    pair: &DirichletPair,
    q: f64,
    temperature: f64,
    hypothesis: Hypothesis,
    n_mc: usize,
    rng: &RngStream,
) -> Result<SetSize, SimError> {
    if n_mc < MIN_MC {
        return Err(SimError::Invalid(format!("n_mc={n_mc} is below the minimum {MIN_MC}")));
    }
    let channel = ThresholdChannel::new(q, temperature)?;
    let gamma = match hypothesis {
        Hypothesis::Out => pair.gamma_out(),
        Hypothesis::In => pair.gamma_in(),
    };
    let sampler = DirichletSampler::new(gamma)?;
    let sizes = batch_sizes(n_mc);
    let sums = map_tasks(BATCHES, |b| {
        let mut stream = rng.child((2 * b + hypothesis.index()) as u64);
        let mut p = vec![0.0; pair.k()];
        let mut total = 0.0;
        for _ in 0..sizes[b] {
            sampler.sample_into(&mut stream, &mut p);
            total += p.iter().map(|&x| channel.include_prob(x)).sum::<f64>();
        }
        total
    });
    let batch_means: Vec<f64> = sums.iter().zip(sizes).map(|(s, n)| s / n as f64).collect();
    Ok(SetSize {
        mean: sums.iter().sum::<f64>() / n_mc as f64,
        se: mean_and_se(&batch_means).1,
    })
}
