pub mod bench;
pub mod compare;
pub mod ensemble;
pub mod exact;
pub mod sample_check;
pub mod table;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;
use spdc_core::exact::natural_window;
use spdc_core::phase_space::{EnsembleConfig, Representation, Scheme};
use spdc_core::stats_io::RunManifest;
use spdc_core::TimeGrid;

use crate::config::{at_least, positive, required, Resolver};
use crate::error::CliError;
use crate::{EnsembleArgs, RepresentationArg, SchemeArg};

/// Output directory plus the manifest that will list its files.
pub struct Output {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Output {
    /// Called only after every parameter has been validated.
    pub fn create(dir: &Path, command: &str, params: BTreeMap<String, Value>) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let mut manifest = RunManifest::start(command);
        manifest.parameters = params;
        Ok(Output { dir: dir.to_path_buf(), manifest })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn record(&mut self, name: &str) -> Result<(), CliError> {
        Ok(self.manifest.record(&self.dir, name)?)
    }

    pub fn write_json(&mut self, name: &str, value: &Value) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        fs::write(self.path(name), text).map_err(|e| CliError::Io(format!("{name}: {e}")))?;
        self.record(name)
    }

    pub fn finish(self) -> Result<PathBuf, CliError> {
        Ok(self.manifest.finish(&self.dir)?)
    }
}

pub fn default_tau_max(n: u64) -> f64 {
    natural_window(n as usize, 1.5)
}

pub fn grid(tau_max: f64, samples: usize, tol: f64) -> Result<TimeGrid, CliError> {
    TimeGrid::with_tolerances(tau_max, samples, tol, tol * 1e-2).map_err(|e| CliError::Validation(e.to_string()))
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::EulerMaruyama => Scheme::EulerMaruyama,
            SchemeArg::Midpoint => Scheme::SemiImplicitMidpoint,
        }
    }
}

impl From<RepresentationArg> for Representation {
    fn from(r: RepresentationArg) -> Self {
        match r {
            RepresentationArg::PositiveP => Representation::PositiveP,
            RepresentationArg::TruncatedWigner => Representation::TruncatedWigner,
        }
    }
}

/// Shared ensemble parameters, resolved and validated.
pub struct EnsembleParams {
    pub n: u64,
    pub tau_max: f64,
    pub samples: usize,
    pub config: EnsembleConfig,
}

pub fn resolve_ensemble(args: EnsembleArgs, r: &mut Resolver) -> Result<EnsembleParams, CliError> {
    let n = at_least("n", required("n", r.take_opt("n", args.n)?)?, 1)?;
    let defaults = EnsembleConfig::for_photons(n);
    let tau_max = positive("tau-max", r.take("tau-max", args.tau_max, || default_tau_max(n))?)?;
    let samples = at_least("samples", r.take("samples", args.samples, || 41)?, 2)?;
    let n_traj = at_least("trajectories", r.take("trajectories", args.trajectories, || defaults.n_traj)?, 2)?;
    let n_subensembles =
        at_least("subensembles", r.take("subensembles", args.subensembles, || defaults.n_subensembles)?, 2)?;
    let dt = positive("dt", r.take("dt", args.dt, || defaults.dt)?)?;
    let scheme: SchemeArg = r.take("scheme", args.scheme, || SchemeArg::EulerMaruyama)?;
    let seed = r.take("seed", args.seed, || defaults.seed)?;
    let threshold = positive("threshold", r.take("threshold", args.threshold, || defaults.divergence_threshold)?)?;
    let config = EnsembleConfig { n_traj, dt, scheme: scheme.into(), seed, n_subensembles, divergence_threshold: threshold };
    config.validate().map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(EnsembleParams { n, tau_max, samples, config })
}
