//! `sdmcap`: analytic and simulated capacity statistics of SDM links with
//! mode-dependent gain.

mod cache;
mod commands;
mod grid;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sdmcap_core::{Method, PowerControl};

use crate::output::Format;

#[derive(Parser, Debug)]
#[command(name = "sdmcap", version, about = "Capacity statistics of SDM links with mode-dependent gain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derive the GUE density coefficients for D modes and cache them.
    Coeffs(CoeffsArgs),
    /// Analytic per-mode and total capacity statistics.
    Analytic(AnalyticArgs),
    /// Monte-Carlo multisection ensemble.
    Simulate(SimulateArgs),
    /// Fit the correlation coefficients against simulated variances.
    Fit(FitArgs),
    /// Analytic and simulated total-capacity deviation over parameter grids.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CoeffsArgs {
    #[arg(long)]
    modes: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum MethodArg {
    Auto,
    Gue,
    Wigner,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::Gue => Method::Gue,
            MethodArg::Wigner => Method::Wigner,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum PowerArg {
    Ensemble,
    PerTrial,
}

impl From<PowerArg> for PowerControl {
    fn from(p: PowerArg) -> Self {
        match p {
            PowerArg::Ensemble => PowerControl::Ensemble,
            PowerArg::PerTrial => PowerControl::PerTrial,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct GammaArgs {
    /// Correlation coefficient gamma0; overrides the table (needs --gamma1).
    #[arg(long, requires = "gamma1")]
    gamma0: Option<f64>,
    #[arg(long, requires = "gamma0")]
    gamma1: Option<f64>,
    /// Coefficient table file (default: gamma_table.json in the cache directory).
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyticArgs {
    #[arg(long)]
    modes: usize,
    #[arg(long, allow_negative_numbers = true)]
    snr_db: f64,
    #[arg(long)]
    sigma_mdg_db: f64,
    /// Independent frequency bins averaged per channel.
    #[arg(long, default_value_t = 1)]
    bins: usize,
    #[arg(long, default_value_t = 0.01)]
    pout: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    #[command(flatten)]
    gamma: GammaArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
struct SimArgs {
    #[arg(long, default_value_t = 100)]
    sections: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.01)]
    calibration_tol: f64,
    #[arg(long)]
    calibration_trials: Option<usize>,
    #[arg(long, value_enum, default_value_t = PowerArg::Ensemble)]
    power_control: PowerArg,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    modes: usize,
    #[arg(long, allow_negative_numbers = true)]
    snr_db: f64,
    #[arg(long)]
    sigma_mdg_db: f64,
    #[arg(long, default_value_t = 1)]
    bins: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 50)]
    histogram_bins: usize,
    /// Also write one CSV row per trial here.
    #[arg(long)]
    trials_csv: Option<PathBuf>,
    #[command(flatten)]
    sim: SimArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long)]
    modes: usize,
    #[arg(long, allow_negative_numbers = true)]
    snr_db: f64,
    /// `a,b,c` or `start:stop:step`.
    #[arg(long, default_value = "1,2.5,5,7.5")]
    sigma_grid: String,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    #[arg(long)]
    table: Option<PathBuf>,
    #[command(flatten)]
    sim: SimArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Mode counts, e.g. `4,8`.
    #[arg(long)]
    modes: String,
    #[arg(long, allow_hyphen_values = true)]
    snr_db: String,
    #[arg(long)]
    sigma_grid: String,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Skip the simulated column.
    #[arg(long)]
    no_sim: bool,
    /// Fit and store coefficients for pairs missing from the table, using
    /// the sweep's own simulations.
    #[arg(long, conflicts_with = "no_sim")]
    fit_missing: bool,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    #[command(flatten)]
    gamma: GammaArgs,
    #[command(flatten)]
    sim: SimArgs,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Coeffs(a) => commands::coeffs(&a),
        Command::Analytic(a) => commands::analytic(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Sweep(a) => commands::sweep(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
