//! Exact propagation on the Fock manifold and the observables built on it.

mod dopri;
mod peak;

pub use dopri::{Dopri5, StepCounts};
pub use peak::{find_mu_max, find_mu_max_on, MuMaxResult, MuMaxSearchConfig};

use rayon::prelude::*;

use crate::error::{ModelError, SolverError};
use crate::model::{build_ladder, initial_state, CouplingLadder, ManifoldAmplitudes, PumpSpec, TimeGrid};
use crate::series::{EfficiencySeries, Method};

/// Photon-pair number distribution `p_k = f_k²`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDistribution {
    pub n: usize,
    pub tau: f64,
    pub p: Vec<f64>,
}

impl PairDistribution {
    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn mean_pairs(&self) -> f64 {
        self.p.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }
}

/// Diagnostics of one propagation run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PropagationReport {
    pub steps: StepCounts,
    /// Largest `|Σ f_k² − 1|` seen at a sample time.
    pub max_norm_drift: f64,
}

fn check_dims(state: &ManifoldAmplitudes, ladder: &CouplingLadder) -> Result<(), ModelError> {
    if state.n != ladder.n() || state.f.len() != ladder.n() + 1 {
        return Err(ModelError::DimensionMismatch { expected: ladder.n() + 1, found: state.f.len() });
    }
    Ok(())
}

/// Propagates `state` and hands every grid sample to `visit` as `(τ, f)`.
///
/// Sample times are `state.tau + grid.times()`; the integrator is clamped to
/// land on each of them. Nothing is renormalised.
pub fn propagate_with<F>(
    state: &ManifoldAmplitudes,
    ladder: &CouplingLadder,
    grid: &TimeGrid,
    mut visit: F,
) -> Result<PropagationReport, SolverError>
where
    F: FnMut(f64, &[f64]),
{
    check_dims(state, ladder)?;
    let norm0 = state.norm_sqr();
    let mut report = PropagationReport::default();
    let mut rk = Dopri5::new(ladder, &state.f, state.tau, grid.rel_tol, grid.abs_tol);
    for offset in grid.times() {
        let target = state.tau + offset;
        rk.advance_to(target)?;
        let y = rk.y();
        if y.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite { last_good_tau: target });
        }
        let drift = (y.iter().map(|v| v * v).sum::<f64>() - norm0).abs();
        report.max_norm_drift = report.max_norm_drift.max(drift);
        visit(target, y);
    }
    report.steps = rk.counts();
    Ok(report)
}

/// States at every grid sample time.
pub fn propagate(
    state: &ManifoldAmplitudes,
    ladder: &CouplingLadder,
    grid: &TimeGrid,
) -> Result<Vec<ManifoldAmplitudes>, SolverError> {
    let mut out = Vec::with_capacity(grid.n_samples);
    propagate_with(state, ladder, grid, |tau, f| {
        out.push(ManifoldAmplitudes { n: state.n, f: f.to_vec(), tau });
    })?;
    Ok(out)
}

fn efficiency_of(f: &[f64]) -> f64 {
    let n = f.len() - 1;
    if n == 0 {
        return 0.0;
    }
    let pairs: f64 = f.iter().enumerate().map(|(k, a)| k as f64 * a * a).sum();
    pairs / n as f64
}

/// Mean converted fraction `⟨k⟩/n`; zero for an empty pump.
pub fn efficiency(state: &ManifoldAmplitudes) -> f64 {
    efficiency_of(&state.f)
}

pub fn pair_distribution(state: &ManifoldAmplitudes) -> PairDistribution {
    PairDistribution { n: state.n, tau: state.tau, p: state.f.iter().map(|a| a * a).collect() }
}

fn fock_mu_series(n: usize, grid: &TimeGrid) -> Result<Vec<f64>, SolverError> {
    let ladder = build_ladder(n);
    let mut mu = Vec::with_capacity(grid.n_samples);
    propagate_with(&initial_state(n), &ladder, grid, |_, f| mu.push(efficiency_of(f)))?;
    Ok(mu)
}

/// Exact `μ(τ)` for a Fock or number-distribution pump.
///
/// A distribution pump is weighted by photon number,
/// `μ = Σ w_n·n·μ_n / Σ w_n·n`, i.e. expected converted pairs over expected
/// pump photons. Components run in parallel.
pub fn mu_series(pump: &PumpSpec, grid: &TimeGrid) -> Result<EfficiencySeries, SolverError> {
    let components = pump.components();
    let per_n: Vec<Vec<f64>> = components
        .par_iter()
        .map(|&(n, _)| fock_mu_series(n as usize, grid))
        .collect::<Result<_, _>>()?;
    let denom: f64 = components.iter().map(|&(n, w)| w * n as f64).sum();
    let mut mu = vec![0.0; grid.n_samples];
    if denom > 0.0 {
        for (&(n, w), series) in components.iter().zip(&per_n) {
            let weight = w * n as f64 / denom;
            for (m, s) in mu.iter_mut().zip(series) {
                *m += weight * s;
            }
        }
    }
    Ok(EfficiencySeries { taus: grid.times(), mu, se: None, method: Method::Exact, pump: pump.clone() })
}

/// Window `W·ln(max(n,2))/sqrt(n)` that contains the first conversion cycle.
pub fn natural_window(n: usize, factor: f64) -> f64 {
    let nf = (n.max(1)) as f64;
    factor * (n.max(2) as f64).ln() / nf.sqrt()
}
