//! Search for the maximal probability of complete conversion.
//!
//! `p_n(τ) = f_n(τ)²` starts at zero, rises to a principal conversion peak and
//! then oscillates with revivals. The search scans `p_n` on a grid whose step
//! is tied to the fastest ladder frequency, stops at the first significant
//! local maximum, and refines it by golden-section search. Each refinement
//! evaluation re-integrates from a checkpoint taken before the bracket, so the
//! refined value does not depend on interpolation.

use std::collections::VecDeque;

use serde::Serialize;

use super::dopri::Dopri5;
use super::natural_window;
use crate::error::SolverError;
use crate::model::{build_ladder, initial_state, CouplingLadder, TimeGrid};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuMaxSearchConfig {
    /// `W` in the initial window `W·ln(max(n,2))/sqrt(n)`.
    pub window_factor: f64,
    pub max_doublings: u32,
    /// Coarse step as a fraction of `1/max_k c_k`.
    pub coarse_step_factor: f64,
    pub tau_tol: f64,
    /// Local maxima of `p_n` below this are integrator noise, not peaks.
    pub min_peak: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for MuMaxSearchConfig {
    fn default() -> Self {
        MuMaxSearchConfig {
            window_factor: 12.0,
            max_doublings: 6,
            coarse_step_factor: 0.1,
            tau_tol: 1e-6,
            min_peak: 1e-10,
            rel_tol: TimeGrid::DEFAULT_REL_TOL,
            abs_tol: TimeGrid::DEFAULT_ABS_TOL,
        }
    }
}

impl MuMaxSearchConfig {
    fn validate(&self) -> Result<(), SolverError> {
        let positive = [
            ("window_factor", self.window_factor),
            ("coarse_step_factor", self.coarse_step_factor),
            ("tau_tol", self.tau_tol),
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(SolverError::InvalidSearch(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.min_peak >= 0.0) {
            return Err(SolverError::InvalidSearch("min_peak must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuMaxResult {
    pub n: usize,
    pub mu_max: f64,
    pub tau_star: f64,
    /// Coarse bracket handed to the refinement.
    pub window: (f64, f64),
    pub evaluations: usize,
    pub converged: bool,
    /// Search horizon when the peak was found.
    pub tau_hi: f64,
    pub doublings: u32,
}

impl MuMaxResult {
    /// Placeholder row for an `n` whose search failed.
    pub fn failed(n: usize) -> Self {
        MuMaxResult {
            n,
            mu_max: f64::NAN,
            tau_star: f64::NAN,
            window: (f64::NAN, f64::NAN),
            evaluations: 0,
            converged: false,
            tau_hi: f64::NAN,
            doublings: 0,
        }
    }
}

pub fn find_mu_max(n: usize, config: &MuMaxSearchConfig) -> Result<MuMaxResult, SolverError> {
    find_mu_max_on(&build_ladder(n), config)
}

/// Peak search on an arbitrary ladder, e.g. one rescaled to other time units.
pub fn find_mu_max_on(ladder: &CouplingLadder, config: &MuMaxSearchConfig) -> Result<MuMaxResult, SolverError> {
    config.validate()?;
    let n = ladder.n();
    if n == 0 {
        return Err(SolverError::InvalidSearch("n must be at least 1".into()));
    }
    let dt = config.coarse_step_factor / ladder.max_coupling();
    let mut tau_hi = natural_window(n, config.window_factor);
    let mut doublings = 0;

    let start = initial_state(n);
    let mut rk = Dopri5::new(ladder, &start.f, 0.0, config.rel_tol, config.abs_tol);
    // step-start states, oldest first; front is kept at or before the bracket start
    let mut checkpoints: VecDeque<(f64, Vec<f64>)> = VecDeque::new();
    checkpoints.push_back((0.0, start.f.clone()));

    let mut evaluations = 1;
    let mut prev2 = f64::NAN;
    let mut prev1 = 0.0;
    let mut j: u64 = 1;
    let (lo, hi) = loop {
        let tau = j as f64 * dt;
        if tau > tau_hi {
            if doublings == config.max_doublings {
                return Err(SolverError::PeakNotFound { n, tau_hi, doublings, evaluations });
            }
            tau_hi *= 2.0;
            doublings += 1;
            continue;
        }
        while rk.t() < tau {
            rk.step(tau_hi)?;
            checkpoints.push_back((rk.t(), rk.y().to_vec()));
        }
        let f_n = rk.dense_component(n, tau);
        if !f_n.is_finite() {
            return Err(SolverError::NonFinite { last_good_tau: rk.t() });
        }
        let p = f_n * f_n;
        evaluations += 1;
        if prev1 > prev2 && prev1 >= p && prev1 >= config.min_peak {
            break ((j - 2) as f64 * dt, tau);
        }
        prev2 = prev1;
        prev1 = p;
        j += 1;
        let keep_from = j.saturating_sub(2) as f64 * dt;
        while checkpoints.len() > 1 && checkpoints[1].0 <= keep_from {
            checkpoints.pop_front();
        }
    };

    let (t0, y0) = checkpoints.front().cloned().expect("checkpoint before bracket");
    let mut eval = |tau: f64| -> Result<f64, SolverError> {
        let mut local = Dopri5::new(ladder, &y0, t0, config.rel_tol, config.abs_tol);
        local.advance_to(tau)?;
        evaluations += 1;
        Ok(local.y()[n] * local.y()[n])
    };

    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    let mut iterations = 0;
    while b - a > config.tau_tol && iterations < 200 {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2)?;
        }
        iterations += 1;
    }
    let converged = b - a <= config.tau_tol;
    let tau_star = 0.5 * (a + b);
    let mu_max = eval(tau_star)?;

    Ok(MuMaxResult { n, mu_max, tau_star, window: (lo, hi), evaluations, converged, tau_hi, doublings })
}
