//! The `liralab` command line: argument parsing, subcommands and output
//! rendering. The binary is a thin wrapper around [`run`].

pub mod commands;
pub mod options;
pub mod table;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::Failure;
use options::{Options, Settings};

#[derive(Parser, Debug)]
#[command(name = "liralab", version, about = "Membership-inference leakage under Dirichlet output models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML file with default values for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Subcommand, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Dirichlet parameters, means and variances of a profile.
    Params,
    /// Advantage bounds per disclosure mode (with --curve: β lower bounds).
    Bounds,
    /// Monte Carlo trade-off curves and advantages.
    Simulate,
    /// δ factor of the thresholding channel over q × T.
    DeltaFactor,
    /// Expected decision-set size over q × T.
    Setsize,
    /// Fit Dirichlet or Beta models to confidence CSV files.
    Fit,
    /// Sample a confidence CSV file from a profile.
    Gen,
    /// Bounds and simulations over a swept parameter.
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Params => "params",
            Command::Bounds => "bounds",
            Command::Simulate => "simulate",
            Command::DeltaFactor => "delta-factor",
            Command::Setsize => "setsize",
            Command::Fit => "fit",
            Command::Gen => "gen",
            Command::Sweep => "sweep",
        }
    }
}

/// Resolves settings and runs the command, returning the rendered output
/// and the settings it was produced with.
pub fn render(cli: Cli) -> Result<(String, Settings), Failure> {
    let file = match &cli.config {
        Some(path) => Options::from_file(path)?,
        None => Options::default(),
    };
    let settings = Settings::resolve(cli.command.name(), file.overlay(cli.options))?;
    let report = liralab::exec::with_threads(settings.threads, || match cli.command {
        Command::Params => commands::params(&settings),
        Command::Bounds => commands::bounds(&settings),
        Command::Simulate => commands::simulate(&settings),
        Command::DeltaFactor => commands::delta_factor_table(&settings),
        Command::Setsize => commands::setsize(&settings),
        Command::Fit => commands::fit(&settings),
        Command::Gen => commands::gen(&settings),
        Command::Sweep => commands::sweep(&settings),
    })?;
    let text = table::render(&settings, &report).map_err(Failure::Compute)?;
    Ok((text, settings))
}

/// Runs the command and writes its output to `--out` or stdout.
pub fn run(cli: Cli) -> Result<(), Failure> {
    let (text, settings) = render(cli)?;
    match &settings.out {
        Some(path) => table::write_atomically(path, &text).map_err(Failure::Compute),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Compute(e.into())),
    }
}
