//! Positive-P and truncated Wigner trajectory ensembles for the three-mode
//! interaction.

mod ensemble;
mod quadrature;
mod rng;
mod sampling;
mod sde;

pub use ensemble::{integrate_ensemble, DivergenceReport, EnsembleRun, UNRELIABLE_FRACTION};
pub use quadrature::{
    exponential_log_nodes, gauss_hermite, gauss_laguerre, gauss_legendre, tw_quadrature_mu, WignerQuadrature,
};
pub use rng::TrajectoryRng;
pub use sampling::{sample_pump_fock_pp, sample_pump_fock_tw, sample_vacuum, tw_ring_fourth_moment};
pub use sde::{
    diffusion_matrix, noise_matrix, noise_outer, pp_drift, pp_step, pp_step_with, tw_drift, tw_step,
    DiffusionMatrix, NoiseMatrix, PP_VARIABLES,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::EnsembleError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Representation {
    PositiveP,
    TruncatedWigner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    EulerMaruyama,
    SemiImplicitMidpoint,
}

/// Positive-P sample: the starred partners are independent variables.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PositivePState {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
    pub alpha_p: Complex64,
    pub beta_p: Complex64,
    pub gamma_p: Complex64,
}

/// Truncated Wigner sample; conjugates are plain complex conjugates.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WignerState {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectoryState {
    PositiveP(PositivePState),
    TruncatedWigner(WignerState),
}

impl TrajectoryState {
    pub fn representation(&self) -> Representation {
        match self {
            TrajectoryState::PositiveP(_) => Representation::PositiveP,
            TrajectoryState::TruncatedWigner(_) => Representation::TruncatedWigner,
        }
    }

    /// Largest modulus over the stored variables.
    pub fn max_modulus(&self) -> f64 {
        match self {
            TrajectoryState::PositiveP(s) => s.components().iter().map(|z| z.norm()).fold(0.0, f64::max),
            TrajectoryState::TruncatedWigner(s) => {
                [s.alpha, s.beta, s.gamma].iter().map(|z| z.norm()).fold(0.0, f64::max)
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            TrajectoryState::PositiveP(s) => s.components().iter().all(|z| z.is_finite()),
            TrajectoryState::TruncatedWigner(s) => [s.alpha, s.beta, s.gamma].iter().all(|z| z.is_finite()),
        }
    }

    /// Single-trajectory estimator of the signal occupation: `Re(α⁺α)` for
    /// positive-P, `|α|² − 1/2` for truncated Wigner.
    pub fn signal_occupation(&self) -> f64 {
        match self {
            TrajectoryState::PositiveP(s) => (s.alpha_p * s.alpha).re,
            TrajectoryState::TruncatedWigner(s) => s.alpha.norm_sqr() - 0.5,
        }
    }
}

impl PositivePState {
    pub fn components(&self) -> [Complex64; 6] {
        [self.alpha, self.beta, self.gamma, self.alpha_p, self.beta_p, self.gamma_p]
    }

    fn add(&self, o: &Self) -> Self {
        PositivePState {
            alpha: self.alpha + o.alpha,
            beta: self.beta + o.beta,
            gamma: self.gamma + o.gamma,
            alpha_p: self.alpha_p + o.alpha_p,
            beta_p: self.beta_p + o.beta_p,
            gamma_p: self.gamma_p + o.gamma_p,
        }
    }

    fn scale(&self, k: f64) -> Self {
        PositivePState {
            alpha: self.alpha * k,
            beta: self.beta * k,
            gamma: self.gamma * k,
            alpha_p: self.alpha_p * k,
            beta_p: self.beta_p * k,
            gamma_p: self.gamma_p * k,
        }
    }
}

impl WignerState {
    fn add(&self, o: &Self) -> Self {
        WignerState { alpha: self.alpha + o.alpha, beta: self.beta + o.beta, gamma: self.gamma + o.gamma }
    }

    fn scale(&self, k: f64) -> Self {
        WignerState { alpha: self.alpha * k, beta: self.beta * k, gamma: self.gamma * k }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub n_traj: usize,
    /// Maximum SDE step in `τ`; shortened so samples fall on step boundaries.
    pub dt: f64,
    pub scheme: Scheme,
    pub seed: u64,
    pub n_subensembles: usize,
    /// A trajectory with any `|variable|` above this is frozen and excluded.
    pub divergence_threshold: f64,
}

impl EnsembleConfig {
    pub const DEFAULT_TRAJECTORIES: usize = 10_000;
    pub const DEFAULT_SUBENSEMBLES: usize = 20;

    /// Defaults for pump photon number `n`: `dt = 1e−3/sqrt(max(n,1))`,
    /// Euler–Maruyama, threshold `100·(1 + sqrt(n))`.
    pub fn for_photons(n: u64) -> Self {
        let nf = n.max(1) as f64;
        EnsembleConfig {
            n_traj: Self::DEFAULT_TRAJECTORIES,
            dt: 1e-3 / nf.sqrt(),
            scheme: Scheme::EulerMaruyama,
            seed: 1,
            n_subensembles: Self::DEFAULT_SUBENSEMBLES,
            divergence_threshold: 100.0 * (1.0 + (n as f64).sqrt()),
        }
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        if self.n_traj == 0 {
            return Err(EnsembleError::InvalidConfig("n_traj must be positive".into()));
        }
        if self.n_subensembles < 2 {
            return Err(EnsembleError::InvalidConfig("need at least 2 sub-ensembles for standard errors".into()));
        }
        if self.n_traj % self.n_subensembles != 0 {
            return Err(EnsembleError::InvalidConfig(format!(
                "n_traj = {} is not divisible by n_subensembles = {}",
                self.n_traj, self.n_subensembles
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(EnsembleError::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.divergence_threshold > 0.0) {
            return Err(EnsembleError::InvalidConfig("divergence_threshold must be positive".into()));
        }
        Ok(())
    }
}
