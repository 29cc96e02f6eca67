//! Command-line flags, the optional TOML config file, and their merge.
//!
//! Every flag has a config-file key of the same name (with `_` for `-`);
//! flags win over file values, which win over the built-in defaults.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use liralab::{DisclosureMode, Hypothesis, UncertaintyProfile};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Dirichlet,
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum HypothesisArg {
    Out,
    In,
}

impl From<HypothesisArg> for Hypothesis {
    fn from(h: HypothesisArg) -> Self {
        match h {
            HypothesisArg::Out => Hypothesis::Out,
            HypothesisArg::In => Hypothesis::In,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "kebab-case")]
pub enum SweepParam {
    Delta,
    EpsA,
    EpsE,
    Q,
    Temperature,
    K,
}

/// All flags. Every field is optional so that file values can fill gaps.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Base seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Draws per hypothesis for simulated curves.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Interior α grid size for curves.
    #[arg(long, global = true)]
    pub alpha_points: Option<usize>,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format (default: csv).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads: a count or `auto`.
    #[arg(long, global = true)]
    pub threads: Option<String>,

    /// Number of classes.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Relative calibration error Δ.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Aleatoric uncertainty ε_a.
    #[arg(long, global = true)]
    pub eps_a: Option<f64>,
    /// Epistemic uncertainty ε_e.
    #[arg(long, global = true)]
    pub eps_e: Option<f64>,

    /// Disclosure modes, comma-separated: cv, tlc, ds.
    #[arg(long, global = true, value_delimiter = ',')]
    pub modes: Option<Vec<String>>,
    /// Decision-set threshold.
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// Decision-set temperature (0: deterministic threshold).
    #[arg(long, global = true)]
    pub temperature: Option<f64>,
    /// Threshold grid for delta-factor and setsize.
    #[arg(long, global = true, value_delimiter = ',')]
    pub qs: Option<Vec<f64>>,
    /// Temperature list for delta-factor and setsize.
    #[arg(long, global = true, value_delimiter = ',')]
    pub temperatures: Option<Vec<f64>>,
    /// Monte Carlo draws per hypothesis for set sizes.
    #[arg(long, global = true)]
    pub mc: Option<usize>,

    /// bounds: emit the β lower-bound curve.
    #[arg(long, global = true)]
    #[serde(default)]
    pub curve: bool,

    /// fit: confidence CSV (the out model in pair mode).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// fit: confidence CSV of the in model; enables pair mode.
    #[arg(long, global = true)]
    pub input_in: Option<PathBuf>,
    /// fit: full Dirichlet or the true-label Beta marginal.
    #[arg(long, global = true, value_enum)]
    pub model: Option<Model>,
    /// fit: ground-truth true-label probability for profile inference.
    #[arg(long, global = true)]
    pub p_star: Option<f64>,
    /// fit: floor applied to small probabilities.
    #[arg(long, global = true)]
    pub clamp: Option<f64>,
    /// fit: rescale adjusted or off-sum rows to sum to 1.
    #[arg(long, global = true)]
    #[serde(default)]
    pub renormalize: bool,
    /// fit: convergence tolerance on the likelihood score.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// fit: iteration cap.
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,

    /// gen: which model to sample.
    #[arg(long, global = true, value_enum)]
    pub hypothesis: Option<HypothesisArg>,
    /// gen: number of rows.
    #[arg(long, global = true)]
    pub n: Option<usize>,

    /// sweep: parameter to vary.
    #[arg(long, global = true, value_enum)]
    pub param: Option<SweepParam>,
    /// sweep: values of the swept parameter.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub values: Option<Vec<f64>>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

impl Options {
    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: Options) -> Options {
        overlay!(self, top; seed, samples, alpha_points, out, format, threads, k, delta, eps_a,
            eps_e, modes, q, temperature, qs, temperatures, mc, input, input_in, model, p_star,
            clamp, tol, max_iter, hypothesis, n, param, values);
        self.curve |= top.curve;
        self.renormalize |= top.renormalize;
        self
    }

    pub fn from_file(path: &PathBuf) -> Result<Options> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config file {}", path.display()))
    }
}

/// Fully resolved settings. This is what output files embed; `out`,
/// `threads` and the config path are left out so that outputs do not depend
/// on where they are written or how many workers produced them.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub command: String,
    pub seed: u64,
    pub samples: usize,
    pub alpha_points: usize,
    pub format: Format,
    pub k: usize,
    pub delta: f64,
    pub eps_a: f64,
    pub eps_e: f64,
    pub modes: Vec<String>,
    pub q: f64,
    pub temperature: f64,
    pub qs: Vec<f64>,
    pub temperatures: Vec<f64>,
    pub mc: usize,
    pub curve: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_in: Option<PathBuf>,
    pub model: Model,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_star: Option<f64>,
    pub clamp: f64,
    pub renormalize: bool,
    pub tol: f64,
    pub max_iter: usize,
    pub hypothesis: HypothesisArg,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param: Option<SweepParam>,
    pub values: Vec<f64>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub threads: Option<usize>,
}

fn grid(start: f64, stop: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
        .collect()
}

/// Default sweep values for each parameter.
pub fn default_values(param: SweepParam) -> Vec<f64> {
    match param {
        SweepParam::Delta => grid(0.0, 0.95, 20),
        SweepParam::EpsA => grid(0.2, 0.9, 20),
        SweepParam::EpsE => grid(0.1, 1.0, 20),
        SweepParam::Q => (1..=19).map(|i| i as f64 / 20.0).collect(),
        SweepParam::Temperature => vec![0.0, 0.01, 0.05, 0.1, 1.0, 10.0],
        SweepParam::K => vec![2.0, 3.0, 5.0, 10.0, 15.0],
    }
}

impl Settings {
    pub fn resolve(command: &str, o: Options) -> Result<Settings> {
        let threads = match o.threads.as_deref() {
            None | Some("auto") => None,
            Some(t) => Some(
                t.parse::<usize>()
                    .ok()
                    .filter(|&n| n > 0)
                    .with_context(|| format!("--threads must be a positive count or `auto`, got `{t}`"))?,
            ),
        };
        let param = o.param;
        Ok(Settings {
            command: command.to_string(),
            seed: o.seed.unwrap_or(2024),
            samples: o.samples.unwrap_or(1_000_000),
            alpha_points: o.alpha_points.unwrap_or(999),
            format: o.format.unwrap_or(Format::Csv),
            k: o.k.unwrap_or(10),
            delta: o.delta.unwrap_or(0.2),
            eps_a: o.eps_a.unwrap_or(0.5),
            eps_e: o.eps_e.unwrap_or(0.25),
            modes: o
                .modes
                .unwrap_or_else(|| vec!["cv".into(), "tlc".into(), "ds".into()]),
            q: o.q.unwrap_or(0.2),
            temperature: o.temperature.unwrap_or(0.0),
            qs: o.qs.unwrap_or_else(|| (0..=20).map(|i| i as f64 / 20.0).collect()),
            temperatures: o.temperatures.unwrap_or_else(|| {
                if command == "delta-factor" {
                    vec![1e-4, 0.02, 0.05, 0.1, 0.2]
                } else {
                    vec![0.0]
                }
            }),
            mc: o.mc.unwrap_or(100_000),
            curve: o.curve,
            input: o.input,
            input_in: o.input_in,
            model: o.model.unwrap_or(Model::Dirichlet),
            p_star: o.p_star,
            clamp: o.clamp.unwrap_or(liralab::fitting::DEFAULT_CLAMP),
            renormalize: o.renormalize,
            tol: o.tol.unwrap_or(liralab::fitting::DEFAULT_TOL),
            max_iter: o.max_iter.unwrap_or(liralab::fitting::DEFAULT_MAX_ITER),
            hypothesis: o.hypothesis.unwrap_or(HypothesisArg::Out),
            n: o.n.unwrap_or(1000),
            values: o
                .values
                .unwrap_or_else(|| param.map(default_values).unwrap_or_default()),
            param,
            out: o.out,
            threads,
        })
    }

    pub fn profile(&self) -> Result<UncertaintyProfile, liralab::ValidationError> {
        UncertaintyProfile::new(self.k, self.delta, self.eps_a, self.eps_e)
    }

    pub fn disclosure_modes(&self) -> Result<Vec<DisclosureMode>> {
        if self.modes.is_empty() {
            bail!("--modes must name at least one of cv, tlc, ds");
        }
        self.modes
            .iter()
            .map(|m| parse_mode(m, self.q, self.temperature))
            .collect()
    }

    pub fn alphas(&self) -> Result<Vec<f64>> {
        if self.alpha_points == 0 {
            bail!("--alpha-points must be at least 1");
        }
        Ok(liralab::curve::uniform_alpha_grid(self.alpha_points))
    }
}

pub fn parse_mode(name: &str, q: f64, temperature: f64) -> Result<DisclosureMode> {
    let mode = match name.trim().to_ascii_lowercase().as_str() {
        "cv" => DisclosureMode::Cv,
        "tlc" => DisclosureMode::Tlc,
        "ds" => DisclosureMode::Ds { q, temperature },
        other => bail!("unknown disclosure mode `{other}` (expected cv, tlc or ds)"),
    };
    mode.validate()?;
    Ok(mode)
}
