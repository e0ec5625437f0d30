use std::fs;
use std::path::Path;

use serde_json::{json, Value};
use spdc_core::stats_io::write_series_csv;
use spdc_core::{EfficiencySeries, TimeGrid};

use super::ensemble::{divergence_csv, run_ensemble};
use super::exact::run_exact;
use super::{grid, resolve_ensemble, Output};
use crate::config::{at_least, positive, ConfigFile, Resolver};
use crate::error::CliError;
use crate::{CompareArgs, RepresentationArg};

pub const ENSEMBLE_N_LIMIT: u64 = 5000;

/// Deviations of an ensemble series from the exact one over `0..window`.
struct Deviation {
    max_abs: f64,
    max_abs_z: f64,
    outside: usize,
}

fn deviation(ens: &EfficiencySeries, exact: &EfficiencySeries, window: usize, floor: f64) -> Deviation {
    let se = ens.se.as_deref().unwrap_or(&[]);
    let mut d = Deviation { max_abs: 0.0, max_abs_z: 0.0, outside: 0 };
    for i in 0..window {
        let diff = (ens.mu[i] - exact.mu[i]).abs();
        let s = se.get(i).copied().unwrap_or(0.0);
        d.max_abs = d.max_abs.max(diff);
        if s > 0.0 {
            d.max_abs_z = d.max_abs_z.max(diff / s);
        }
        if !(diff <= (3.0 * s).max(floor)) {
            d.outside += 1;
        }
    }
    d
}

pub fn run(args: CompareArgs, config: Option<&ConfigFile>, out: &Path) -> Result<(), CliError> {
    let mut r = Resolver::new(config);
    let p = resolve_ensemble(args.ensemble, &mut r)?;
    let tol = positive("tol", r.take("tol", args.tol, || TimeGrid::DEFAULT_REL_TOL)?)?;
    let with_ensembles = r.take("ensembles", args.ensembles, || p.n <= ENSEMBLE_N_LIMIT)?;
    let min_checkpoints = at_least("min-checkpoints", r.take("min-checkpoints", args.min_checkpoints, || 20)?, 1)?;
    let floor = r.take("wigner-floor", args.wigner_floor, || 1e-2)?;
    if !(floor >= 0.0) {
        return Err(CliError::Validation(format!("--wigner-floor must be non-negative, got {floor}")));
    }
    let shared = grid(p.tau_max, p.samples, tol)?;
    let mut output = Output::create(out, "compare", r.finish()?)?;

    let exact = run_exact(p.n, &shared)?.series;
    write_series_csv(&exact, &output.path("exact.csv"))?;
    output.record("exact.csv")?;

    let mut summary = json!({
        "n": p.n,
        "tau_max": p.tau_max,
        "samples": p.samples,
        "trajectories": p.config.n_traj,
        "exact": { "max_mu": exact.mu.iter().cloned().fold(f64::NEG_INFINITY, f64::max) },
    });
    if !with_ensembles {
        summary["status"] = json!("exact_only");
        output.write_json("summary.json", &summary)?;
        output.finish()?;
        println!("n = {}: exact only (ensembles disabled)", p.n);
        return Ok(());
    }

    let pp = run_ensemble(&p, RepresentationArg::PositiveP, tol)?;
    let tw = run_ensemble(&p, RepresentationArg::TruncatedWigner, tol)?;
    write_series_csv(&pp.series, &output.path("pplus.csv"))?;
    output.record("pplus.csv")?;
    write_series_csv(&tw.series, &output.path("wigner.csv"))?;
    output.record("wigner.csv")?;
    let div = divergence_csv(&exact.taus, &[("positive_p", &pp.divergence), ("truncated_wigner", &tw.divergence)]);
    fs::write(output.path("divergence.csv"), div).map_err(|e| CliError::Io(e.to_string()))?;
    output.record("divergence.csv")?;

    let window = pp.divergence.valid_samples();
    // τ = 0 is not a checkpoint: positive-P is exactly zero there
    let checkpoints = window.saturating_sub(1);
    let pp_dev = deviation(&pp.series, &exact, window, 0.0);
    let tw_dev = deviation(&tw.series, &exact, window, floor);
    let tw_full = deviation(&tw.series, &exact, p.samples, floor);
    let pp_pass = pp_dev.outside == 0;
    let status = if checkpoints < min_checkpoints {
        "window_too_short"
    } else if !pp_pass {
        "positive_p_failed"
    } else {
        "pass"
    };
    let window_end: Value = if window > 0 { json!(exact.taus[window - 1]) } else { Value::Null };
    summary["status"] = json!(status);
    summary["window"] = json!({
        "valid_samples": window,
        "checkpoints": checkpoints,
        "min_checkpoints": min_checkpoints,
        "end_tau": window_end,
        "unreliable_from_tau": pp.divergence.unreliable_from.map(|i| exact.taus[i]),
    });
    summary["positive_p"] = json!({
        "max_abs_dev": pp_dev.max_abs,
        "max_abs_z": pp_dev.max_abs_z,
        "points_outside_3se": pp_dev.outside,
        "pass": pp_pass,
    });
    summary["truncated_wigner"] = json!({
        "floor": floor,
        "max_abs_dev": tw_dev.max_abs,
        "max_abs_z": tw_dev.max_abs_z,
        "points_outside_tolerance": tw_dev.outside,
        "max_abs_dev_full_grid": tw_full.max_abs,
        "pass": tw_dev.outside == 0,
    });
    output.write_json("summary.json", &summary)?;
    output.finish()?;

    println!("n = {}, {} trajectories, validity window {} samples (τ ≤ {})", p.n, p.config.n_traj, window, window_end);
    println!("positive-P: max |Δμ| {:.3e}, max |z| {:.2}, outside 3 SE: {}", pp_dev.max_abs, pp_dev.max_abs_z, pp_dev.outside);
    println!("truncated Wigner: max |Δμ| {:.3e}, outside max(3 SE, {floor}): {}", tw_dev.max_abs, tw_dev.outside);
    match status {
        "window_too_short" => Err(CliError::Numerical(format!(
            "positive-P validity window has {checkpoints} checkpoints, fewer than {min_checkpoints}"
        ))),
        "positive_p_failed" => {
            Err(CliError::Check(format!("positive-P outside 3 SE at {} in-window points", pp_dev.outside)))
        }
        _ => Ok(()),
    }
}
