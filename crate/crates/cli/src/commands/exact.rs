use std::path::Path;

use spdc_core::exact::{pair_distribution, propagate_with, PairDistribution};
use spdc_core::stats_io::{write_distribution, write_series_csv};
use spdc_core::{build_ladder, initial_state, EfficiencySeries, Method, PumpSpec, TimeGrid};

use super::{default_tau_max, grid, Output};
use crate::config::{at_least, positive, required, ConfigFile, Resolver};
use crate::error::CliError;
use crate::ExactArgs;

pub const NORM_DRIFT_LIMIT: f64 = 1e-8;
pub const DISTRIBUTION_SUM_LIMIT: f64 = 1e-9;

pub struct ExactRun {
    pub series: EfficiencySeries,
    pub final_distribution: PairDistribution,
    pub max_norm_drift: f64,
    pub max_distribution_error: f64,
}

/// Propagates a Fock pump and checks norm and distribution sums at each sample.
pub fn run_exact(n: u64, grid: &TimeGrid) -> Result<ExactRun, CliError> {
    let n_us = n as usize;
    let start = initial_state(n_us);
    let mut mu = Vec::with_capacity(grid.n_samples);
    let mut worst_sum: f64 = 0.0;
    let mut last = start.clone();
    let report = propagate_with(&start, &build_ladder(n_us), grid, |tau, f| {
        last.f.copy_from_slice(f);
        last.tau = tau;
        let dist = pair_distribution(&last);
        worst_sum = worst_sum.max((dist.total() - 1.0).abs());
        mu.push(dist.mean_pairs() / n as f64);
    })
    .map_err(|e| CliError::Numerical(e.to_string()))?;
    Ok(ExactRun {
        series: EfficiencySeries { taus: grid.times(), mu, se: None, method: Method::Exact, pump: PumpSpec::Fock(n) },
        final_distribution: pair_distribution(&last),
        max_norm_drift: report.max_norm_drift,
        max_distribution_error: worst_sum,
    })
}

pub fn run(args: ExactArgs, config: Option<&ConfigFile>, out: &Path) -> Result<(), CliError> {
    let mut r = Resolver::new(config);
    let n = at_least("n", required("n", r.take_opt("n", args.n)?)?, 1)?;
    let tau_max = positive("tau-max", r.take("tau-max", args.tau_max, || default_tau_max(n))?)?;
    let samples = at_least("samples", r.take("samples", args.samples, || 201)?, 2)?;
    let tol = positive("tol", r.take("tol", args.tol, || TimeGrid::DEFAULT_REL_TOL)?)?;
    let grid = grid(tau_max, samples, tol)?;
    let mut output = Output::create(out, "exact", r.finish()?)?;

    let result = run_exact(n, &grid)?;
    write_series_csv(&result.series, &output.path("series.csv"))?;
    output.record("series.csv")?;
    write_distribution(&result.final_distribution, &output.path("distribution.csv"))?;
    output.record("distribution.csv")?;
    output.finish()?;

    let peak = result.series.mu.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!("n = {n}, τ ∈ [0, {tau_max}], {samples} samples");
    println!("max μ on grid = {peak:.6}, μ(τ_max) = {:.6}", result.series.mu[samples - 1]);
    println!("norm drift {:.3e}, distribution sum error {:.3e}", result.max_norm_drift, result.max_distribution_error);
    if result.max_norm_drift > NORM_DRIFT_LIMIT || result.max_distribution_error > DISTRIBUTION_SUM_LIMIT {
        return Err(CliError::Numerical(format!(
            "conservation violated: norm drift {:e}, distribution error {:e}",
            result.max_norm_drift, result.max_distribution_error
        )));
    }
    Ok(())
}
