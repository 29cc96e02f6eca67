use super::ds::{cross_fitted_betas, DsAccumulator};
use super::llr::LlrKernel;
use super::roc::beta_from_samples;
use super::{batch_sizes, mean_and_se, DisclosureMode, SimError, BATCHES, MIN_MC, MIN_SAMPLES};
use crate::curve::{trapezoid_advantage, CurvePoint, CurveSource, TradeoffCurve};
use crate::exec::map_tasks;
use crate::numerics::{DirichletSampler, RngStream};
use crate::uncertainty::DirichletPair;

/// Output of one (batch, hypothesis) task. Entries follow the order of the
/// requested modes.
pub(crate) struct TaskOutput {
    /// Ascending LLR samples for CV/TLC modes (empty for DS).
    pub(crate) llr: Vec<Vec<f64>>,
    /// Outcome probability sums for DS modes (empty for CV/TLC).
    pub(crate) ds: Vec<Vec<f64>>,
    pub(crate) clamped: Vec<u64>,
}

enum Consumer {
    Cv(LlrKernel),
    Tlc(LlrKernel),
    Ds(DsAccumulator),
}

pub(crate) fn check_alphas(alphas: &[f64]) -> Result<(), SimError> {
    if alphas.is_empty() {
        return Err(SimError::Invalid("α grid is empty".into()));
    }
    let mut prev = 0.0;
    for &a in alphas {
        if !(a > prev && a < 1.0) {
            return Err(SimError::Invalid(format!(
                "α grid must be strictly increasing inside (0, 1); saw {a} after {prev}"
            )));
        }
        prev = a;
    }
    Ok(())
}

/// Draws `n` observations per hypothesis in `2·BATCHES` tasks (task
/// `2·b + h` for batch `b`, hypothesis `h`), feeding every mode from the
/// same Dirichlet draws.
pub(crate) fn run_tasks(
    pair: &DirichletPair,
    modes: &[DisclosureMode],
    n: usize,
    rng: &RngStream,
) -> Result<Vec<TaskOutput>, SimError> {
    let k = pair.k();
    let cv = LlrKernel::new(pair)?;
    let tlc = LlrKernel::true_label(pair)?;
    let consumers = modes
        .iter()
        .map(|m| {
            Ok(match *m {
                DisclosureMode::Cv => Consumer::Cv(cv.clone()),
                DisclosureMode::Tlc => Consumer::Tlc(tlc.clone()),
                DisclosureMode::Ds { q, temperature } => Consumer::Ds(DsAccumulator::new(k, q, temperature)?),
            })
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    let samplers = [
        DirichletSampler::new(pair.gamma_out())?,
        DirichletSampler::new(pair.gamma_in())?,
    ];
    let sizes = batch_sizes(n);

    Ok(map_tasks(2 * BATCHES, |task| {
        let n_task = sizes[task / 2];
        let sampler = &samplers[task % 2];
        let mut stream = rng.child(task as u64);
        let mut llr: Vec<Vec<f64>> = consumers
            .iter()
            .map(|c| match c {
                Consumer::Ds(_) => Vec::new(),
                _ => Vec::with_capacity(n_task),
            })
            .collect();
        let mut acc: Vec<Option<DsAccumulator>> = consumers
            .iter()
            .map(|c| match c {
                Consumer::Ds(a) => Some(a.clone()),
                _ => None,
            })
            .collect();
        let mut clamped = vec![0u64; consumers.len()];
        let mut p = vec![0.0; k];
        for _ in 0..n_task {
            sampler.sample_into(&mut stream, &mut p);
            for (m, c) in consumers.iter().enumerate() {
                match c {
                    Consumer::Cv(kernel) => llr[m].push(kernel.eval(&p, &mut clamped[m])),
                    Consumer::Tlc(kernel) => {
                        let rest: f64 = p[1..].iter().sum();
                        llr[m].push(kernel.eval2(p[0], rest, &mut clamped[m]));
                    }
                    Consumer::Ds(_) => acc[m].as_mut().expect("DS accumulator").add(&p),
                }
            }
        }
        for v in &mut llr {
            v.sort_unstable_by(f64::total_cmp);
        }
        TaskOutput {
            llr,
            ds: acc.into_iter().map(|a| a.map(DsAccumulator::into_sums).unwrap_or_default()).collect(),
            clamped,
        }
    }))
}

fn with_endpoints(alphas: &[f64], betas: &[f64], ses: &[f64]) -> Vec<CurvePoint> {
    let mut points = Vec::with_capacity(alphas.len() + 2);
    points.push(CurvePoint { alpha: 0.0, beta: 0.0, beta_se: 0.0 });
    for ((&alpha, &beta), &beta_se) in alphas.iter().zip(betas).zip(ses) {
        points.push(CurvePoint { alpha, beta, beta_se });
    }
    points.push(CurvePoint { alpha: 1.0, beta: 1.0, beta_se: 0.0 });
    points
}

fn batch_advantage(alphas: &[f64], betas: &[f64]) -> f64 {
    let inner = alphas.iter().copied().zip(betas.iter().copied());
    trapezoid_advantage(std::iter::once((0.0, 0.0)).chain(inner).chain(std::iter::once((1.0, 1.0))))
}

fn pointwise_se(batch_betas: &[Vec<f64>], i: usize) -> f64 {
    let column: Vec<f64> = batch_betas.iter().map(|b| b[i]).collect();
    mean_and_se(&column).1
}

/// Simulated trade-off curves for several modes from shared Dirichlet draws.
///
/// CV/TLC curves are the pooled empirical ROC of `n_samples` LLR draws per
/// hypothesis. DS curves are cross-fitted discrete ROCs averaged over
/// batches, with `n_samples` draws per hypothesis feeding the outcome pmfs.
/// Every curve carries the endpoints (0, 0) and (1, 1) around `alphas`, and
/// standard errors come from the spread of batch estimates.
pub fn simulate_modes(
    pair: &DirichletPair,
    modes: &[DisclosureMode],
    n_samples: usize,
    alphas: &[f64],
    rng: &RngStream,
) -> Result<Vec<TradeoffCurve>, SimError> {
    check_alphas(alphas)?;
    for m in modes {
        m.validate()?;
    }
    let continuous = modes.iter().any(|m| !matches!(m, DisclosureMode::Ds { .. }));
    let min = if continuous { MIN_SAMPLES } else { MIN_MC };
    if n_samples < min {
        return Err(SimError::Invalid(format!(
            "n_samples={n_samples} is below the minimum {min}"
        )));
    }
    let tasks = run_tasks(pair, modes, n_samples, rng)?;

    let mut curves = Vec::with_capacity(modes.len());
    for (m, mode) in modes.iter().enumerate() {
        let clamped: u64 = tasks.iter().map(|t| t.clamped[m]).sum();
        let (betas, batch_betas) = match mode {
            DisclosureMode::Cv | DisclosureMode::Tlc => {
                let batch_betas: Vec<Vec<f64>> = (0..BATCHES)
                    .map(|b| beta_from_samples(&tasks[2 * b].llr[m], &tasks[2 * b + 1].llr[m], alphas))
                    .collect();
                let pooled = |h: usize| -> Vec<f64> {
                    let mut all: Vec<f64> = (0..BATCHES)
                        .flat_map(|b| tasks[2 * b + h].llr[m].iter().copied())
                        .collect();
                    // Concatenated sorted runs: the stable sort merges them.
                    all.sort_by(f64::total_cmp);
                    all
                };
                (beta_from_samples(&pooled(0), &pooled(1), alphas), batch_betas)
            }
            DisclosureMode::Ds { .. } => {
                let outs: Vec<&[f64]> = (0..BATCHES).map(|b| tasks[2 * b].ds[m].as_slice()).collect();
                let ins: Vec<&[f64]> = (0..BATCHES).map(|b| tasks[2 * b + 1].ds[m].as_slice()).collect();
                let batch_betas = cross_fitted_betas(&outs, &ins, alphas);
                let mean = (0..alphas.len())
                    .map(|i| batch_betas.iter().map(|b| b[i]).sum::<f64>() / BATCHES as f64)
                    .collect();
                (mean, batch_betas)
            }
        };
        let ses: Vec<f64> = (0..alphas.len()).map(|i| pointwise_se(&batch_betas, i)).collect();
        let batch_adv: Vec<f64> = batch_betas.iter().map(|b| batch_advantage(alphas, b)).collect();
        let source = CurveSource::Simulated {
            mode: *mode,
            n_samples,
            seed: rng.seed(),
            stream_id: rng.stream_id(),
        };
        let curve = TradeoffCurve::new(with_endpoints(alphas, &betas, &ses), source)?
            .with_diagnostics(mean_and_se(&batch_adv).1, clamped);
        curves.push(curve);
    }
    Ok(curves)
}

/// Simulated trade-off curve for a single mode.
pub fn simulate_tradeoff(
    pair: &DirichletPair,
    mode: &DisclosureMode,
    n_samples: usize,
    alphas: &[f64],
    rng: &RngStream,
) -> Result<TradeoffCurve, SimError> {
    let mut curves = simulate_modes(pair, std::slice::from_ref(mode), n_samples, alphas, rng)?;
    Ok(curves.remove(0))
}
