//! Ensemble integration and moment estimation.
//!
//! Trajectories run independently (in parallel when a rayon pool has more
//! than one thread) and are collected in index order. Every sum afterwards is
//! a fixed pairwise tree over that order, so the estimates are bit-identical
//! for any thread count.

use rayon::prelude::*;

use super::rng::TrajectoryRng;
use super::sampling::{sample_pump_fock_pp, sample_pump_fock_tw, sample_vacuum};
use super::sde::{pp_step, tw_step};
use super::{EnsembleConfig, PositivePState, Representation, TrajectoryState, WignerState};
use crate::error::EnsembleError;
use crate::model::{PumpSpec, TimeGrid};
use crate::series::{EfficiencySeries, Method};

/// Excluded fraction above which the series is flagged unreliable.
pub const UNRELIABLE_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceReport {
    /// Fraction of trajectories frozen at or before each sample time.
    pub excluded_fraction: Vec<f64>,
    /// First sample index where the excluded fraction exceeds
    /// [`UNRELIABLE_FRACTION`].
    pub unreliable_from: Option<usize>,
}

impl DivergenceReport {
    /// Number of leading samples inside the validity window.
    pub fn valid_samples(&self) -> usize {
        self.unreliable_from.unwrap_or(self.excluded_fraction.len())
    }

    pub fn is_reliable(&self) -> bool {
        self.unreliable_from.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRun {
    pub series: EfficiencySeries,
    pub divergence: DivergenceReport,
}

pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn initial_state(n: u64, representation: Representation, rng: &mut TrajectoryRng) -> TrajectoryState {
    match representation {
        Representation::PositiveP => {
            let (gamma, gamma_p) = sample_pump_fock_pp(n, rng);
            let (alpha, alpha_p) = sample_vacuum(representation, rng);
            let (beta, beta_p) = sample_vacuum(representation, rng);
            TrajectoryState::PositiveP(PositivePState { alpha, beta, gamma, alpha_p, beta_p, gamma_p })
        }
        Representation::TruncatedWigner => {
            let gamma = sample_pump_fock_tw(n, rng);
            let (alpha, _) = sample_vacuum(representation, rng);
            let (beta, _) = sample_vacuum(representation, rng);
            TrajectoryState::TruncatedWigner(WignerState { alpha, beta, gamma })
        }
    }
}

/// Occupation estimates at each sample time; `None` once the trajectory has
/// been frozen.
fn run_trajectory(
    n: u64,
    stream: u64,
    config: &EnsembleConfig,
    taus: &[f64],
    representation: Representation,
) -> Vec<Option<f64>> {
    let mut rng = TrajectoryRng::new(config.seed, stream);
    let mut state = initial_state(n, representation, &mut rng);
    let mut out = Vec::with_capacity(taus.len());
    let mut alive = true;
    let mut t = taus[0];
    for &target in taus {
        let span = target - t;
        if alive && span > 0.0 {
            let steps = (span / config.dt).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                state = match state {
                    TrajectoryState::PositiveP(s) => TrajectoryState::PositiveP(pp_step(&s, h, config.scheme, &mut rng)),
                    TrajectoryState::TruncatedWigner(s) => TrajectoryState::TruncatedWigner(tw_step(&s, h, config.scheme)),
                };
                if !state.is_finite() || state.max_modulus() > config.divergence_threshold {
                    alive = false;
                    break;
                }
            }
        }
        t = target;
        out.push(alive.then(|| state.signal_occupation()));
    }
    out
}

struct Moments {
    mean: Vec<f64>,
    se: Vec<f64>,
    excluded: Vec<f64>,
}

fn reduce(trajectories: &[Vec<Option<f64>>], samples: usize, n_sub: usize) -> Moments {
    let block = trajectories.len() / n_sub;
    let total = trajectories.len() as f64;
    let mut mean = Vec::with_capacity(samples);
    let mut se = Vec::with_capacity(samples);
    let mut excluded = Vec::with_capacity(samples);
    let mut buf = Vec::with_capacity(trajectories.len());
    for i in 0..samples {
        buf.clear();
        buf.extend(trajectories.iter().filter_map(|t| t[i]));
        excluded.push(1.0 - buf.len() as f64 / total);
        mean.push(if buf.is_empty() { f64::NAN } else { pairwise_sum(&buf) / buf.len() as f64 });

        let sub_means: Vec<f64> = trajectories
            .chunks(block)
            .filter_map(|chunk| {
                let vals: Vec<f64> = chunk.iter().filter_map(|t| t[i]).collect();
                (!vals.is_empty()).then(|| pairwise_sum(&vals) / vals.len() as f64)
            })
            .collect();
        let k = sub_means.len();
        se.push(if k < 2 {
            f64::NAN
        } else {
            let m = pairwise_sum(&sub_means) / k as f64;
            let dev: Vec<f64> = sub_means.iter().map(|x| (x - m) * (x - m)).collect();
            (pairwise_sum(&dev) / ((k - 1) * k) as f64).sqrt()
        });
    }
    Moments { mean, se, excluded }
}

struct ComponentRun {
    mu: Vec<f64>,
    se: Vec<f64>,
    excluded: Vec<f64>,
}

fn run_component(
    n: u64,
    component: u64,
    config: &EnsembleConfig,
    taus: &[f64],
    representation: Representation,
) -> ComponentRun {
    if n == 0 {
        let zeros = vec![0.0; taus.len()];
        return ComponentRun { mu: zeros.clone(), se: zeros.clone(), excluded: zeros };
    }
    let trajectories: Vec<Vec<Option<f64>>> = (0..config.n_traj as u64)
        .into_par_iter()
        .map(|j| run_trajectory(n, (component << 40) | j, config, taus, representation))
        .collect();
    let m = reduce(&trajectories, taus.len(), config.n_subensembles);
    let nf = n as f64;
    ComponentRun {
        mu: m.mean.iter().map(|x| x / nf).collect(),
        se: m.se.iter().map(|x| x / nf).collect(),
        excluded: m.excluded,
    }
}

/// Runs the ensemble and records `μ(τ)` with sub-ensemble standard errors.
///
/// Positive-P estimates `μ = Re⟨α⁺α⟩/n`, truncated Wigner `(⟨|α|²⟩ − 1/2)/n`.
/// A number-distribution pump runs one ensemble per component (stream block
/// `component << 40`) and combines them with weights `w·n/Σw·n`.
pub fn integrate_ensemble(
    pump: &PumpSpec,
    config: &EnsembleConfig,
    grid: &TimeGrid,
    representation: Representation,
) -> Result<EnsembleRun, EnsembleError> {
    config.validate()?;
    let taus = grid.times();
    let components = pump.components();
    let denom: f64 = components.iter().map(|&(n, w)| w * n as f64).sum();

    let mut mu = vec![0.0; taus.len()];
    let mut var = vec![0.0; taus.len()];
    let mut excluded = vec![0.0_f64; taus.len()];
    for (idx, &(n, w)) in components.iter().enumerate() {
        let run = run_component(n, idx as u64, config, &taus, representation);
        let weight = if denom > 0.0 { w * n as f64 / denom } else { 0.0 };
        for i in 0..taus.len() {
            mu[i] += weight * run.mu[i];
            var[i] += (weight * run.se[i]).powi(2);
            excluded[i] = excluded[i].max(run.excluded[i]);
        }
    }
    let unreliable_from = excluded.iter().position(|&f| f > UNRELIABLE_FRACTION);
    let method = match representation {
        Representation::PositiveP => Method::PositiveP,
        Representation::TruncatedWigner => Method::TruncatedWigner,
    };
    Ok(EnsembleRun {
        series: EfficiencySeries {
            taus,
            mu,
            se: Some(var.into_iter().map(f64::sqrt).collect()),
            method,
            pump: pump.clone(),
        },
        divergence: DivergenceReport { excluded_fraction: excluded, unreliable_from },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::Scheme;

    fn small_config(n: u64) -> EnsembleConfig {
        EnsembleConfig { n_traj: 400, n_subensembles: 20, ..EnsembleConfig::for_photons(n) }
    }

    #[test]
    fn pairwise_sum_matches_plain_sum() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn starts_from_zero_efficiency() {
        let grid = TimeGrid::new(0.05, 3).unwrap();
        for rep in [Representation::PositiveP, Representation::TruncatedWigner] {
            let run = integrate_ensemble(&PumpSpec::Fock(10), &small_config(10), &grid, rep).unwrap();
            let se = run.series.se.as_ref().unwrap();
            assert!(run.series.mu[0].abs() <= 5.0 * se[0] + 1e-15, "{rep:?}: {} ± {}", run.series.mu[0], se[0]);
        }
    }

    #[test]
    fn positive_p_starts_exactly_at_zero() {
        let grid = TimeGrid::new(0.05, 3).unwrap();
        let run = integrate_ensemble(&PumpSpec::Fock(10), &small_config(10), &grid, Representation::PositiveP).unwrap();
        assert_eq!(run.series.mu[0], 0.0);
        assert_eq!(run.series.se.as_ref().unwrap()[0], 0.0);
    }

    #[test]
    fn empty_pump_gives_zero() {
        let grid = TimeGrid::new(0.5, 4).unwrap();
        let run = integrate_ensemble(&PumpSpec::Fock(0), &small_config(0), &grid, Representation::TruncatedWigner).unwrap();
        assert!(run.series.mu.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn tiny_threshold_flags_everything() {
        let grid = TimeGrid::new(0.1, 5).unwrap();
        let cfg = EnsembleConfig { divergence_threshold: 1e-3, ..small_config(4) };
        let run = integrate_ensemble(&PumpSpec::Fock(4), &cfg, &grid, Representation::PositiveP).unwrap();
        assert_eq!(run.divergence.unreliable_from, Some(1));
        assert_eq!(run.divergence.valid_samples(), 1);
        assert_eq!(run.divergence.excluded_fraction[4], 1.0);
        assert!(run.series.mu[4].is_nan());
    }

    #[test]
    fn rejects_bad_config() {
        let grid = TimeGrid::new(0.1, 5).unwrap();
        let cfg = EnsembleConfig { n_traj: 401, ..small_config(4) };
        assert!(integrate_ensemble(&PumpSpec::Fock(4), &cfg, &grid, Representation::PositiveP).is_err());
    }

    #[test]
    fn same_seed_same_series() {
        let grid = TimeGrid::new(0.2, 6).unwrap();
        let cfg = EnsembleConfig { scheme: Scheme::SemiImplicitMidpoint, ..small_config(5) };
        let a = integrate_ensemble(&PumpSpec::Fock(5), &cfg, &grid, Representation::PositiveP).unwrap();
        let b = integrate_ensemble(&PumpSpec::Fock(5), &cfg, &grid, Representation::PositiveP).unwrap();
        assert_eq!(a, b);
        let c = integrate_ensemble(&PumpSpec::Fock(5), &EnsembleConfig { seed: 2, ..cfg }, &grid, Representation::PositiveP)
            .unwrap();
        assert_ne!(a.series.mu, c.series.mu);
    }
}
