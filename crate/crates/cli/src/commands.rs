use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use sdmcap_core::capacity::per_mode_stats;
use sdmcap_core::gamma_fit::fit_with;
use sdmcap_core::total_capacity::{apply_frequency_diversity, outage_capacity, total_stats, total_variance};
use sdmcap_core::{
    derive_coefficients, run_ensemble, ChannelSpec, CoefficientTable, CorrelationModel, Error, GueCoefficients, McConfig,
    McEnsembleResult, Method,
};

use crate::output::{emit, render, Format};
use crate::{cache, grid, AnalyticArgs, CoeffsArgs, FitArgs, GammaArgs, SimArgs, SimulateArgs, SweepArgs};

/// No correlation coefficients are known for a `(D, SNR)` pair.
#[derive(Debug)]
pub struct MissingGamma {
    pub modes: usize,
    pub snr_db: f64,
    pub table: String,
}

impl std::fmt::Display for MissingGamma {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "no correlation coefficients for D = {} at {} dB in {}; run `sdmcap fit` or pass --gamma0/--gamma1",
            self.modes, self.snr_db, self.table
        )
    }
}

impl std::error::Error for MissingGamma {}

/// 2 out-of-range input, 3 missing coefficients, 4 simulation failure,
/// 5 fit failure, 1 anything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<MissingGamma>().is_some() {
        return 3;
    }
    match err.downcast_ref::<Error>() {
        Some(
            Error::InvalidSpec(_)
            | Error::UnsupportedOrder { .. }
            | Error::Domain(_)
            | Error::Degenerate
            | Error::CorrelationOutOfRange { .. }
            | Error::ModelMismatch { .. },
        ) => 2,
        Some(Error::Calibration { .. } | Error::Trial(_) | Error::Ensemble { .. } | Error::UndefinedCorrelation { .. }) => 4,
        Some(Error::Fit { .. }) => 5,
        Some(_) => 1,
        None if err.downcast_ref::<RangeError>().is_some() => 2,
        None => 1,
    }
}

/// Bad command-line values caught before reaching the library.
#[derive(Debug)]
pub struct RangeError(pub String);

impl std::fmt::Display for RangeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for RangeError {}

fn range_err(msg: impl Into<String>) -> anyhow::Error {
    RangeError(msg.into()).into()
}

fn as_range<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| range_err(format!("{e:#}")))
}

fn set_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(range_err("--threads must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn resolve_model(modes: usize, snr_db: f64, gamma: &GammaArgs, table: &CoefficientTable) -> Result<CorrelationModel> {
    if let (Some(g0), Some(g1)) = (gamma.gamma0, gamma.gamma1) {
        return Ok(CorrelationModel::new(g0, g1, modes, snr_db));
    }
    table.lookup(modes, snr_db).ok_or_else(|| {
        MissingGamma { modes, snr_db, table: cache::table_path(gamma.table.as_deref()).display().to_string() }.into()
    })
}

#[derive(Serialize)]
struct CoeffsReport {
    #[serde(rename = "D")]
    modes: usize,
    alpha: f64,
    alpha_exact: String,
    beta: Vec<String>,
    beta_decimal: Vec<f64>,
    unit_area: String,
    unit_variance: String,
    cache_file: String,
}

fn pass(ok: bool) -> String {
    if ok { "PASS" } else { "FAIL" }.to_string()
}

pub fn coeffs(args: &CoeffsArgs) -> Result<()> {
    let d = args.modes;
    let mut stored = cache::load_coefficients()?;
    let key = d.to_string();
    let coeffs = match stored.get(&key) {
        Some(c) => {
            log::info!("using cached coefficients for D = {d}");
            GueCoefficients::from_cached(d, c)?
        }
        None => {
            let c = derive_coefficients(d)?;
            stored.insert(key, c.to_cached());
            cache::save_coefficients(&stored)?;
            c
        }
    };
    let report = CoeffsReport {
        modes: d,
        alpha: coeffs.alpha,
        alpha_exact: format!("sqrt({}/pi)", 2 * (d + 1)),
        beta: coeffs.beta.iter().map(|b| b.to_string()).collect(),
        beta_decimal: coeffs.beta_f64(),
        unit_area: pass(coeffs.area_exact().to_string() == "1"),
        unit_variance: pass(coeffs.variance_exact().to_string() == "1"),
        cache_file: cache::coefficient_path().display().to_string(),
    };
    emit(&render(&report, args.output.format)?, args.output.out.as_deref())
}

#[derive(Serialize)]
struct ModeRow {
    index: usize,
    /// Not produced by the Wigner method.
    gain_mean_db: Option<f64>,
    gain_sigma_db: Option<f64>,
    cap_mean_bits_per_s_per_hz: f64,
    cap_sigma_bits_per_s_per_hz: f64,
}

#[derive(Serialize)]
struct AnalyticReport {
    #[serde(rename = "D")]
    modes: usize,
    snr_db: f64,
    sigma_mdg_db: f64,
    bins: usize,
    method: Method,
    mu_lambda_db: f64,
    per_mode: Vec<ModeRow>,
    gamma0: f64,
    gamma1: f64,
    correlation: Vec<Vec<f64>>,
    total_mean_bits_per_s_per_hz: f64,
    total_mean_exact_bits_per_s_per_hz: f64,
    total_sigma_bits_per_s_per_hz: f64,
    total_sigma_bins_bits_per_s_per_hz: f64,
    p_out: f64,
    outage_capacity_bits_per_s_per_hz: f64,
}

pub fn analytic(args: &AnalyticArgs) -> Result<()> {
    let spec = ChannelSpec::new(args.modes, args.snr_db, args.sigma_mdg_db, args.bins)?;
    let table = cache::load_table(&cache::table_path(args.gamma.table.as_deref()))?;
    let model = resolve_model(spec.modes, spec.snr_db, &args.gamma, &table)?;
    let stats = per_mode_stats(&spec, args.method.into())?;
    let single = total_stats(&spec, &stats, &model)?;
    let binned = apply_frequency_diversity(&single, spec.freq_bins)?;
    let outage = outage_capacity(binned.mu_ct, binned.sigma_ct, args.pout)?;
    let per_mode = (0..spec.modes)
        .map(|i| ModeRow {
            index: i + 1,
            gain_mean_db: stats.gain_means_db.get(i).copied(),
            gain_sigma_db: stats.gain_sigmas_db.get(i).copied(),
            cap_mean_bits_per_s_per_hz: stats.cap_means[i],
            cap_sigma_bits_per_s_per_hz: stats.cap_sigmas[i],
        })
        .collect();
    let report = AnalyticReport {
        modes: spec.modes,
        snr_db: spec.snr_db,
        sigma_mdg_db: spec.sigma_mdg_db,
        bins: spec.freq_bins,
        method: stats.method,
        mu_lambda_db: stats.mu_lambda_db,
        per_mode,
        gamma0: model.gamma0,
        gamma1: model.gamma1,
        correlation: model.correlation_matrix(spec.sigma_mdg_db),
        total_mean_bits_per_s_per_hz: single.mu_ct,
        total_mean_exact_bits_per_s_per_hz: single.mu_ct_exact,
        total_sigma_bits_per_s_per_hz: single.sigma_ct,
        total_sigma_bins_bits_per_s_per_hz: binned.sigma_ct,
        p_out: args.pout,
        outage_capacity_bits_per_s_per_hz: outage,
    };
    emit(&render(&report, args.output.format)?, args.output.out.as_deref())
}

fn mc_config(spec: ChannelSpec, trials: usize, sim: &SimArgs) -> McConfig {
    McConfig {
        sections: sim.sections,
        trials,
        seed: sim.seed,
        calibration_tol: sim.calibration_tol,
        calibration_trials: sim.calibration_trials,
        power_control: sim.power_control.into(),
        ..McConfig::new(spec)
    }
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    set_threads(args.sim.threads)?;
    let spec = ChannelSpec::new(args.modes, args.snr_db, args.sigma_mdg_db, args.bins)?;
    let config = McConfig { histogram_bins: args.histogram_bins, ..mc_config(spec, args.trials, &args.sim) };
    let result = run_ensemble(&config)?;
    if let Some(path) = &args.trials_csv {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        result.write_trials_csv(BufWriter::new(file))?;
    }
    print_summary(&result);
    emit(&render(&result, args.output.format)?, args.output.out.as_deref())
}

fn print_summary(r: &McEnsembleResult) {
    let fmt = |xs: &[f64]| xs.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ");
    eprintln!(
        "D = {}, {} trials ({} discarded): section gain {:.4} dB, offset {:.4} dB, gain std {:.4} dB",
        r.config.spec.modes,
        r.trials_used,
        r.trials_discarded,
        r.calibration.section_gain_db,
        r.calibration.offset_db,
        r.gain_std
    );
    eprintln!("per-mode capacity means: {}", fmt(&r.per_mode_cap_mean));
    eprintln!("per-mode capacity stds:  {}", fmt(&r.per_mode_cap_std));
    eprintln!("total: mean {:.4}, std {:.4} bit/s/Hz", r.total_mean, r.total_var.sqrt());
}

/// Simulated single-bin total-capacity variances on a sigma grid.
fn oracle_variances(modes: usize, snr_db: f64, sigmas: &[f64], trials: usize, sim: &SimArgs) -> Result<Vec<f64>> {
    sigmas
        .iter()
        .map(|&s| {
            let spec = ChannelSpec::new(modes, snr_db, s, 1)?;
            Ok(run_ensemble(&mc_config(spec, trials, sim))?.total_var)
        })
        .collect()
}

#[derive(Serialize)]
struct FitPoint {
    sigma_mdg_db: f64,
    oracle_var: f64,
    analytic_var: f64,
}

#[derive(Serialize)]
struct FitSummary {
    #[serde(rename = "D")]
    modes: usize,
    snr_db: f64,
    gamma0: f64,
    gamma1: f64,
    msle: f64,
    evaluations: usize,
    trials_per_point: usize,
    points: Vec<FitPoint>,
    table_file: String,
}

fn fit_and_store(
    modes: usize,
    snr_db: f64,
    sigmas: &[f64],
    oracle: &[f64],
    method: Method,
    table: &mut CoefficientTable,
    table_path: &Path,
) -> Result<sdmcap_core::FitReport> {
    let provider = |sigma: f64| -> sdmcap_core::Result<Vec<f64>> {
        Ok(per_mode_stats(&ChannelSpec::new(modes, snr_db, sigma, 1)?, method)?.cap_sigmas)
    };
    let report = fit_with(modes, snr_db, sigmas, oracle, &provider)?;
    table.upsert(&report.model);
    cache::save_table(table, table_path)?;
    Ok(report)
}

pub fn fit(args: &FitArgs) -> Result<()> {
    set_threads(args.sim.threads)?;
    let sigmas = as_range(grid::parse_grid(&args.sigma_grid))?;
    // Validate the pair before spending time on simulations.
    ChannelSpec::new(args.modes, args.snr_db, sigmas[0], 1)?;
    if sigmas.len() < 3 || sigmas.iter().any(|&s| !(s > 0.0)) || !sigmas.windows(2).all(|w| w[1] > w[0]) {
        return Err(range_err("fit needs at least three positive, ascending sigma values"));
    }
    let oracle = oracle_variances(args.modes, args.snr_db, &sigmas, args.trials, &args.sim)?;
    let path = cache::table_path(args.table.as_deref());
    let mut table = cache::load_table(&path)?;
    let report = fit_and_store(args.modes, args.snr_db, &sigmas, &oracle, args.method.into(), &mut table, &path)?;
    let summary = FitSummary {
        modes: args.modes,
        snr_db: args.snr_db,
        gamma0: report.model.gamma0,
        gamma1: report.model.gamma1,
        msle: report.msle,
        evaluations: report.evaluations,
        trials_per_point: args.trials,
        points: sigmas
            .iter()
            .zip(&oracle)
            .zip(&report.analytic_vars)
            .map(|((&s, &o), &a)| FitPoint { sigma_mdg_db: s, oracle_var: o, analytic_var: a })
            .collect(),
        table_file: path.display().to_string(),
    };
    emit(&render(&summary, args.output.format)?, args.output.out.as_deref())
}

#[derive(Serialize)]
struct SweepRow {
    #[serde(rename = "D")]
    modes: usize,
    snr_db: f64,
    sigma_mdg_db: f64,
    sigma_ct_analytic_bits_per_s_per_hz: f64,
    sigma_ct_sim_bits_per_s_per_hz: Option<f64>,
}

#[derive(Serialize)]
struct SweepReport {
    rows: Vec<SweepRow>,
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    set_threads(args.sim.threads)?;
    let modes = as_range(grid::parse_modes(&args.modes))?;
    let snrs = as_range(grid::parse_grid(&args.snr_db))?;
    let sigmas = as_range(grid::parse_grid(&args.sigma_grid))?;
    let method: Method = args.method.into();
    let path = cache::table_path(args.gamma.table.as_deref());
    let mut table = cache::load_table(&path)?;

    let mut rows = Vec::new();
    for &d in &modes {
        for &snr in &snrs {
            for &s in &sigmas {
                ChannelSpec::new(d, snr, s, 1)?;
            }
            let simulated = if args.no_sim {
                None
            } else {
                Some(oracle_variances(d, snr, &sigmas, args.trials, &args.sim)?)
            };
            let model = match resolve_model(d, snr, &args.gamma, &table) {
                Ok(m) => m,
                Err(e) if args.fit_missing && e.downcast_ref::<MissingGamma>().is_some() => {
                    let sim = simulated.as_ref().expect("--fit-missing requires simulations");
                    let (fit_sigmas, fit_vars): (Vec<f64>, Vec<f64>) =
                        sigmas.iter().zip(sim).filter(|(s, _)| **s > 0.0).map(|(&s, &v)| (s, v)).unzip();
                    let report = fit_and_store(d, snr, &fit_sigmas, &fit_vars, method, &mut table, &path)?;
                    log::info!("fitted D = {d}, {snr} dB: msle {:.4}", report.msle);
                    report.model
                }
                Err(e) => return Err(e),
            };
            for (k, &s) in sigmas.iter().enumerate() {
                let spec = ChannelSpec::new(d, snr, s, 1)?;
                let stats = per_mode_stats(&spec, method)?;
                let analytic = if spec.is_degenerate() {
                    0.0
                } else {
                    let v = total_variance(&stats.cap_sigmas, &model, s);
                    if !(v > 0.0) {
                        return Err(Error::CorrelationOutOfRange { variance: v }.into());
                    }
                    v.sqrt()
                };
                rows.push(SweepRow {
                    modes: d,
                    snr_db: snr,
                    sigma_mdg_db: s,
                    sigma_ct_analytic_bits_per_s_per_hz: analytic,
                    sigma_ct_sim_bits_per_s_per_hz: simulated.as_ref().map(|v| v[k].sqrt()),
                });
            }
        }
    }
    if rows.is_empty() {
        bail!("empty sweep");
    }
    let report = SweepReport { rows };
    let text = match args.output.format {
        Format::Json => render(&report, Format::Json)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &report.rows {
                w.serialize(row)?;
            }
            String::from_utf8(w.into_inner()?)?
        }
    };
    emit(&text, args.output.out.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let code = |e: anyhow::Error| exit_code(&e);
        assert_eq!(code(Error::UnsupportedOrder { modes: 9 }.into()), 2);
        assert_eq!(code(range_err("bad grid")), 2);
        assert_eq!(code(MissingGamma { modes: 4, snr_db: 10.0, table: "t".into() }.into()), 3);
        assert_eq!(code(Error::Calibration { iterations: 50, last_std_db: 1.0 }.into()), 4);
        assert_eq!(code(Error::Ensemble { discarded: 2, trials: 100 }.into()), 4);
        let best = CorrelationModel::new(0.1, 0.0, 4, 10.0);
        assert_eq!(code(Error::Fit { best, msle: 1.0 }.into()), 5);
        assert_eq!(code(Error::Quadrature { estimate: 0.0 }.into()), 1);
        assert_eq!(code(anyhow::anyhow!("other")), 1);
        let wrapped = anyhow::Error::from(Error::Trial("x".into())).context("while simulating");
        assert_eq!(code(wrapped), 4);
    }
}
