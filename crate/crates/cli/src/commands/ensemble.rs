use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use spdc_core::phase_space::{integrate_ensemble, DivergenceReport, EnsembleRun};
use spdc_core::stats_io::{fmt_f64, write_series_csv};
use spdc_core::PumpSpec;

use super::{grid, resolve_ensemble, EnsembleParams, Output};
use crate::config::{ConfigFile, Resolver};
use crate::error::CliError;
use crate::{EnsembleArgs, RepresentationArg};

pub fn run_ensemble(p: &EnsembleParams, rep: RepresentationArg, tol: f64) -> Result<EnsembleRun, CliError> {
    let grid = grid(p.tau_max, p.samples, tol)?;
    integrate_ensemble(&PumpSpec::Fock(p.n), &p.config, &grid, rep.into()).map_err(|e| CliError::Validation(e.to_string()))
}

pub fn divergence_csv(taus: &[f64], reports: &[(&str, &DivergenceReport)]) -> String {
    let mut out = String::from("tau");
    for (name, _) in reports {
        let _ = write!(out, ",{name}");
    }
    out.push('\n');
    for (i, t) in taus.iter().enumerate() {
        let _ = write!(out, "{}", fmt_f64(*t));
        for (_, r) in reports {
            let _ = write!(out, ",{}", fmt_f64(r.excluded_fraction[i]));
        }
        out.push('\n');
    }
    out
}

pub fn run(args: EnsembleArgs, rep: RepresentationArg, config: Option<&ConfigFile>, out: &Path) -> Result<(), CliError> {
    let command = match rep {
        RepresentationArg::PositiveP => "pplus",
        RepresentationArg::TruncatedWigner => "wigner",
    };
    let mut r = Resolver::new(config);
    let p = resolve_ensemble(args, &mut r)?;
    let mut output = Output::create(out, command, r.finish()?)?;

    let run = run_ensemble(&p, rep, spdc_core::TimeGrid::DEFAULT_REL_TOL)?;
    write_series_csv(&run.series, &output.path("series.csv"))?;
    output.record("series.csv")?;
    let div = divergence_csv(&run.series.taus, &[("excluded_fraction", &run.divergence)]);
    fs::write(output.path("divergence.csv"), div).map_err(|e| CliError::Io(e.to_string()))?;
    output.record("divergence.csv")?;
    output.finish()?;

    let last = p.samples - 1;
    let se = run.series.se.as_ref().map_or(f64::NAN, |s| s[last]);
    println!("{command}: n = {}, {} trajectories, τ_max = {}", p.n, p.config.n_traj, p.tau_max);
    println!("μ(τ_max) = {:.6} ± {:.6}", run.series.mu[last], se);
    match run.divergence.unreliable_from {
        None => println!("no divergence flag; excluded fraction at end {:.4}", run.divergence.excluded_fraction[last]),
        Some(i) => println!("unreliable from τ = {} (sample {i})", run.series.taus[i]),
    }
    Ok(())
}
