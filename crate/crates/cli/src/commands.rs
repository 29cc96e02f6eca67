use std::fmt;

use liralab::bounds::{advantage_ub, beta_lower_bound, delta_factor, AdvantageBounds, BoundsError};
use liralab::fitting::{fit_beta_tlc, fit_dirichlet, generate_dataset, ingest_csv, FitError, FitResult};
use liralab::sim::{expected_set_size, simulate_modes, SimError};
use liralab::uncertainty::{infer_profile_with_tolerance, pair_means, pair_variances, profile_to_pair};
use liralab::{ConfidenceDataset, DirichletPair, DisclosureMode, Hypothesis, RngStream, ValidationError};

use crate::options::{Format, Model, Settings, SweepParam};
use crate::table::{Cell, Report, Table};

/// A failed command, split by exit status: bad input (2) or a failed
/// computation (1).
#[derive(Debug)]
pub enum Failure {
    Input(anyhow::Error),
    Compute(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => 2,
            Failure::Compute(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(e) | Failure::Compute(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

impl From<ValidationError> for Failure {
    fn from(e: ValidationError) -> Self {
        Failure::Input(e.into())
    }
}

fn bounds_is_input(e: &BoundsError) -> bool {
    matches!(
        e,
        BoundsError::Validation(_)
            | BoundsError::TooManyClasses { .. }
            | BoundsError::Threshold(_)
            | BoundsError::Alpha(_)
            | BoundsError::Grid(_)
    )
}

impl From<BoundsError> for Failure {
    fn from(e: BoundsError) -> Self {
        if bounds_is_input(&e) {
            Failure::Input(e.into())
        } else {
            Failure::Compute(e.into())
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let input = match &e {
            SimError::Invalid(_) => true,
            SimError::Bounds(b) => bounds_is_input(b),
            _ => false,
        };
        if input {
            Failure::Input(e.into())
        } else {
            Failure::Compute(e.into())
        }
    }
}

impl From<FitError> for Failure {
    fn from(e: FitError) -> Self {
        match e {
            FitError::Numerics(_) => Failure::Compute(e.into()),
            _ => Failure::Input(e.into()),
        }
    }
}

type Outcome = Result<Report, Failure>;

fn rng(s: &Settings) -> RngStream {
    RngStream::new(s.seed, 0)
}

fn mode_cells(mode: &DisclosureMode) -> [Cell; 3] {
    match *mode {
        DisclosureMode::Ds { q, temperature } => [mode.name().into(), q.into(), temperature.into()],
        _ => [mode.name().into(), Cell::Empty, Cell::Empty],
    }
}

pub fn params(s: &Settings) -> Outcome {
    let profile = s.profile()?;
    let pair = profile_to_pair(&profile)?;
    let (mo, mi) = pair_means(&pair);
    let (vo, vi) = pair_variances(&pair);
    let mut rows = Table::new(&["component", "gamma_out", "gamma_in", "mean_out", "mean_in", "var_out", "var_in"]);
    for k in 0..pair.k() {
        rows.push(vec![
            k.into(),
            pair.gamma_out()[k].into(),
            pair.gamma_in()[k].into(),
            mo[k].into(),
            mi[k].into(),
            vo[k].into(),
            vi[k].into(),
        ]);
    }
    let mut summary = Table::new(&["sum_out", "sum_in", "p_star_0", "max_delta"]);
    summary.push(vec![
        pair.sum_out().into(),
        pair.sum_in().into(),
        profile.ground_truth().p_star_0.into(),
        liralab::UncertaintyProfile::max_delta(profile.eps_a).into(),
    ]);
    Ok(Report {
        summary: Some(summary),
        rows,
    })
}

const BOUND_COLUMNS: [&str; 10] = [
    "mode",
    "q",
    "temperature",
    "exact",
    "approx",
    "raw_exact",
    "raw_approx",
    "d_out_in",
    "d_in_out",
    "delta_factor",
];

fn bound_row(b: &AdvantageBounds) -> Vec<Cell> {
    let mut row: Vec<Cell> = mode_cells(&b.mode).into();
    row.extend([
        b.exact.into(),
        b.approx.into(),
        b.raw_exact.into(),
        b.raw_approx.into(),
        b.divergences.d_out_in.into(),
        b.divergences.d_in_out.into(),
        b.delta_factor.as_ref().map_or(Cell::Empty, |d| d.value.into()),
    ]);
    row
}

pub fn bounds(s: &Settings) -> Outcome {
    let profile = s.profile()?;
    let modes = s.disclosure_modes()?;
    let all: Vec<AdvantageBounds> = modes
        .iter()
        .map(|m| advantage_ub(&profile, m))
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&BOUND_COLUMNS);
    for b in &all {
        table.push(bound_row(b));
    }
    if !s.curve {
        return Ok(Report {
            summary: None,
            rows: table,
        });
    }
    let alphas = s.alphas()?;
    let mut curve = Table::new(&["mode", "q", "temperature", "alpha", "beta_lb"]);
    for b in &all {
        for &alpha in &alphas {
            let mut row: Vec<Cell> = mode_cells(&b.mode).into();
            row.extend([alpha.into(), beta_lower_bound(&b.divergences, alpha)?.into()]);
            curve.push(row);
        }
    }
    Ok(Report {
        summary: Some(table),
        rows: curve,
    })
}

const HIGH_TNR: f64 = 0.999;

pub fn simulate(s: &Settings) -> Outcome {
    let profile = s.profile()?;
    let pair = profile_to_pair(&profile)?;
    let modes = s.disclosure_modes()?;
    let alphas = s.alphas()?;
    let bounds: Vec<AdvantageBounds> = modes
        .iter()
        .map(|m| advantage_ub(&profile, m))
        .collect::<Result<_, _>>()?;
    let curves = simulate_modes(&pair, &modes, s.samples, &alphas, &rng(s))?;

    let mut rows = Table::new(&["mode", "q", "temperature", "alpha", "beta", "beta_se", "beta_lb"]);
    let mut summary = Table::new(&[
        "mode",
        "q",
        "temperature",
        "avg_advantage",
        "avg_advantage_se",
        "advantage_at_0.999",
        "advantage_at_0.999_se",
        "bound_exact",
        "bound_approx",
        "clamped",
    ]);
    for ((mode, curve), bound) in modes.iter().zip(&curves).zip(&bounds) {
        for p in curve.points().iter().filter(|p| p.alpha > 0.0 && p.alpha < 1.0) {
            let mut row: Vec<Cell> = mode_cells(mode).into();
            row.extend([
                p.alpha.into(),
                p.beta.into(),
                p.beta_se.into(),
                beta_lower_bound(&bound.divergences, p.alpha)?.into(),
            ]);
            rows.push(row);
        }
        let mut row: Vec<Cell> = mode_cells(mode).into();
        row.extend([
            curve.avg_advantage().into(),
            curve.avg_advantage_se().into(),
            curve.advantage_at(HIGH_TNR).map_err(SimError::from)?.into(),
            curve.beta_se_at(HIGH_TNR).map_err(SimError::from)?.into(),
            bound.exact.into(),
            bound.approx.into(),
            curve.clamped().into(),
        ]);
        summary.push(row);
    }
    Ok(Report {
        summary: Some(summary),
        rows,
    })
}

pub fn delta_factor_table(s: &Settings) -> Outcome {
    let mut rows = Table::new(&["temperature", "q", "k", "delta", "tv"]);
    for &t in &s.temperatures {
        for &q in &s.qs {
            let d = delta_factor(t, q, s.k)?;
            rows.push(vec![t.into(), q.into(), s.k.into(), d.value.into(), d.tv.into()]);
        }
    }
    Ok(Report { summary: None, rows })
}

pub fn setsize(s: &Settings) -> Outcome {
    let pair = profile_to_pair(&s.profile()?)?;
    let stream = rng(s);
    let mut rows = Table::new(&["q", "temperature", "size_out", "se_out", "size_in", "se_in", "size_avg"]);
    for &t in &s.temperatures {
        for &q in &s.qs {
            let out = expected_set_size(&pair, q, t, Hypothesis::Out, s.mc, &stream)?;
            let inn = expected_set_size(&pair, q, t, Hypothesis::In, s.mc, &stream)?;
            rows.push(vec![
                q.into(),
                t.into(),
                out.mean.into(),
                out.se.into(),
                inn.mean.into(),
                inn.se.into(),
                (0.5 * (out.mean + inn.mean)).into(),
            ]);
        }
    }
    Ok(Report { summary: None, rows })
}

fn run_fit(s: &Settings, data: &ConfidenceDataset) -> Result<FitResult, Failure> {
    Ok(match s.model {
        Model::Dirichlet => fit_dirichlet(data, s.tol, s.max_iter)?,
        Model::Beta => fit_beta_tlc(data, s.tol, s.max_iter)?,
    })
}

fn fit_summary(summary: &mut Table, side: &str, data: &ConfidenceDataset, fit: &FitResult) {
    let mut add = |key: &str, value: Cell| summary.push(vec![format!("{side}{key}").into(), value]);
    add("rows", data.len().into());
    add("adjusted_rows", data.adjusted_lines.len().into());
    add("log_likelihood", fit.log_likelihood.into());
    add("iterations", fit.iterations.into());
    add("converged", fit.converged.into());
    add("tolerance_achieved", fit.tolerance_achieved.into());
    add(
        "warning",
        fit.warning.clone().map_or(Cell::Empty, Cell::Text),
    );
}

pub fn fit(s: &Settings) -> Outcome {
    let input = s
        .input
        .as_ref()
        .ok_or_else(|| Failure::Input(anyhow::anyhow!("fit needs --input")))?;
    let data_out = ingest_csv(input, s.clamp, s.renormalize)?;
    let fit_out = run_fit(s, &data_out)?;
    let mut summary = Table::new(&["key", "value"]);

    let Some(input_in) = &s.input_in else {
        let mut rows = Table::new(&["component", "gamma_hat"]);
        for (k, g) in fit_out.gamma_hat.iter().enumerate() {
            rows.push(vec![k.into(), (*g).into()]);
        }
        fit_summary(&mut summary, "", &data_out, &fit_out);
        return Ok(Report {
            summary: Some(summary),
            rows,
        });
    };

    let data_in = ingest_csv(input_in, s.clamp, s.renormalize)?;
    if data_in.k != data_out.k {
        return Err(Failure::Input(anyhow::anyhow!(
            "out and in files have different class counts ({} vs {})",
            data_out.k,
            data_in.k
        )));
    }
    let fit_in = run_fit(s, &data_in)?;
    let mut rows = Table::new(&["component", "gamma_out_hat", "gamma_in_hat"]);
    for (k, (o, i)) in fit_out.gamma_hat.iter().zip(&fit_in.gamma_hat).enumerate() {
        rows.push(vec![k.into(), (*o).into(), (*i).into()]);
    }
    fit_summary(&mut summary, "out.", &data_out, &fit_out);
    fit_summary(&mut summary, "in.", &data_in, &fit_in);
    let pair = DirichletPair::from_fitted(fit_out.gamma_hat.clone(), fit_in.gamma_hat.clone())?;
    let (so, si) = (pair.sum_out(), pair.sum_in());
    summary.push(vec!["sum_rel_diff".into(), ((so - si).abs() / so.max(si)).into()]);
    if let Some(p_star) = s.p_star {
        if s.model == Model::Beta {
            return Err(Failure::Input(anyhow::anyhow!(
                "profile inference needs the full Dirichlet fit (--model dirichlet)"
            )));
        }
        let profile = infer_profile_with_tolerance(&pair, p_star, f64::INFINITY)?;
        summary.push(vec!["delta_hat".into(), profile.delta.into()]);
        summary.push(vec!["eps_a_hat".into(), profile.eps_a.into()]);
        summary.push(vec!["eps_e_hat".into(), profile.eps_e.into()]);
    }
    Ok(Report {
        summary: Some(summary),
        rows,
    })
}

pub fn gen(s: &Settings) -> Outcome {
    if s.format == Format::Json {
        return Err(Failure::Input(anyhow::anyhow!(
            "gen writes the confidence CSV format only"
        )));
    }
    let pair = profile_to_pair(&s.profile()?)?;
    let data = generate_dataset(&pair, s.hypothesis.into(), s.n, &rng(s))?;
    let columns: Vec<String> = (0..data.k).map(|k| format!("p{k}")).collect();
    let mut rows = Table {
        columns,
        rows: Vec::with_capacity(data.len()),
    };
    for r in &data.rows {
        rows.push(r.iter().map(|&x| Cell::Plain(x)).collect());
    }
    Ok(Report { summary: None, rows })
}

fn apply(s: &Settings, param: SweepParam, value: f64) -> Result<Settings, String> {
    let mut cell = s.clone();
    match param {
        SweepParam::Delta => cell.delta = value,
        SweepParam::EpsA => cell.eps_a = value,
        SweepParam::EpsE => cell.eps_e = value,
        SweepParam::Q => cell.q = value,
        SweepParam::Temperature => cell.temperature = value,
        SweepParam::K => {
            if value.fract() != 0.0 || value < 0.0 {
                return Err(format!("k={value} is not a class count"));
            }
            cell.k = value as usize;
        }
    }
    Ok(cell)
}

fn sweep_cell(cell: &Settings, alphas: &[f64]) -> Result<Vec<(DisclosureMode, AdvantageBounds, [f64; 4])>, Failure> {
    let profile = cell.profile()?;
    let pair = profile_to_pair(&profile)?;
    let modes = cell.disclosure_modes()?;
    let bounds: Vec<AdvantageBounds> = modes
        .iter()
        .map(|m| advantage_ub(&profile, m))
        .collect::<Result<_, _>>()?;
    let curves = simulate_modes(&pair, &modes, cell.samples, alphas, &rng(cell))?;
    let mut out = Vec::with_capacity(modes.len());
    for ((mode, bound), curve) in modes.into_iter().zip(bounds).zip(curves) {
        let stats = [
            curve.avg_advantage(),
            curve.avg_advantage_se(),
            curve.advantage_at(HIGH_TNR).map_err(SimError::from)?,
            curve.beta_se_at(HIGH_TNR).map_err(SimError::from)?,
        ];
        out.push((mode, bound, stats));
    }
    Ok(out)
}

pub fn sweep(s: &Settings) -> Outcome {
    let param = s
        .param
        .ok_or_else(|| Failure::Input(anyhow::anyhow!("sweep needs --param")))?;
    if s.values.is_empty() {
        return Err(Failure::Input(anyhow::anyhow!("sweep needs at least one value")));
    }
    let alphas = s.alphas()?;
    let mut rows = Table::new(&[
        "param",
        "value",
        "mode",
        "q",
        "temperature",
        "bound_exact",
        "bound_approx",
        "sim_avg_adv",
        "sim_avg_adv_se",
        "sim_adv_at_0.999",
        "sim_adv_at_0.999_se",
        "status",
    ]);
    let name = serde_json::to_value(param)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    let mut invalid = 0usize;
    for &value in &s.values {
        let result = apply(s, param, value).map_err(|e| Failure::Input(anyhow::anyhow!(e)));
        match result.and_then(|cell| sweep_cell(&cell, &alphas)) {
            Ok(cells) => {
                for (mode, bound, stats) in cells {
                    let mut row: Vec<Cell> = vec![name.clone().into(), value.into()];
                    row.extend(mode_cells(&mode));
                    row.extend([bound.exact.into(), bound.approx.into()]);
                    row.extend(stats.map(Cell::from));
                    row.push("ok".into());
                    rows.push(row);
                }
            }
            Err(Failure::Input(e)) => {
                invalid += 1;
                let mut row: Vec<Cell> = vec![name.clone().into(), value.into()];
                row.extend(std::iter::repeat_n(Cell::Empty, 9));
                row.push(format!("invalid: {e:#}").into());
                rows.push(row);
            }
            Err(e) => return Err(e),
        }
    }
    if invalid > 0 {
        eprintln!("warning: {invalid} of {} sweep points were invalid and skipped", s.values.len());
    }
    Ok(Report { summary: None, rows })
}
