//! Simulation toolkit for non-degenerate parametric down-conversion with a
//! Fock-state pump.
//!
//! Three independent routes to the same dynamics:
//!
//! - [`exact`]: adaptive Runge–Kutta propagation on the `n + 1` dimensional
//!   conserved-excitation manifold, with full pair-number statistics and the
//!   search for the maximal complete-conversion probability.
//! - [`phase_space`]: positive-P and truncated Wigner trajectory ensembles.
//! - [`oracle`]: a dense matrix exponential used to validate the exact solver.
//!
//! [`stats_io`] serialises series, tables, distributions and run manifests.

pub mod error;
pub mod exact;
pub mod model;
pub mod oracle;
pub mod phase_space;
pub mod series;
pub mod stats_io;

pub use error::{EnsembleError, IoError, ModelError, OracleError, SolverError};
pub use model::{build_ladder, initial_state, rhs, CouplingLadder, ManifoldAmplitudes, PumpSpec, TimeGrid};
pub use series::{EfficiencySeries, Method};
