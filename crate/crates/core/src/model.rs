//! Three-mode non-degenerate parametric interaction restricted to its
//! conserved-excitation manifold.
//!
//! The interaction generator is `G = a†b†c − a b c†` with signal `a`, idler `b`
//! and pump `c`. Both `n_a − n_b` and `n_a + n_c` commute with `G`, so a pump
//! Fock state `|0,0,n⟩` only ever reaches the `n + 1` states `|k,k,n−k⟩`. On
//! that manifold the Schrödinger equation (with the coupling rate absorbed
//! into the dimensionless time `τ = κt`) reads
//!
//! ```text
//! df_k/dτ = c_k f_{k−1} − c_{k+1} f_{k+1},    c_k = k·sqrt(n − k + 1)
//! ```
//!
//! The generator restricted to the manifold is real and antisymmetric, so a
//! real initial vector stays real and its Euclidean norm is conserved. This is
//! what makes pump photon numbers of 10⁶ tractable: the state is a single real
//! vector of length `n + 1` and no matrix is ever formed.
//!
//! The non-degenerate choice (distinct signal and idler) is fixed by the
//! two-photon case: its ladder `[√2, 2]` gives a maximal complete-conversion
//! probability of `8/9`, whereas the degenerate `a†²c` ladder would give `3/4`.

use crate::error::ModelError;

/// Tolerance on `Σ w_i = 1` for a number-distribution pump.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Pump photon statistics.
///
/// Number observables of a superposed pump `Σ γ_n |n⟩` are the `|γ_n|²`
/// weighted average of independent Fock-manifold runs, so only the weights
/// are kept. Coherences between manifolds are not represented.
#[derive(Debug, Clone, PartialEq)]
pub enum PumpSpec {
    Fock(u64),
    NumberDistribution(Vec<(u64, f64)>),
}

impl PumpSpec {
    pub fn fock(n: u64) -> Self {
        PumpSpec::Fock(n)
    }

    /// Builds a number-distribution pump, checking that the weights are a
    /// probability distribution over strictly increasing photon numbers.
    pub fn distribution(weights: Vec<(u64, f64)>) -> Result<Self, ModelError> {
        if weights.is_empty() {
            return Err(ModelError::InvalidPump("empty number distribution".into()));
        }
        for pair in weights.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(ModelError::InvalidPump(format!(
                    "photon numbers must be strictly increasing ({} then {})",
                    pair[0].0, pair[1].0
                )));
            }
        }
        if let Some(&(n, w)) = weights.iter().find(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
            return Err(ModelError::InvalidPump(format!("weight {w} for n = {n} is not a probability")));
        }
        let total: f64 = weights.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(ModelError::InvalidPump(format!("weights sum to {total}, expected 1")));
        }
        Ok(PumpSpec::NumberDistribution(weights))
    }

    /// `(n, weight)` components; a Fock pump is a single unit-weight component.
    pub fn components(&self) -> Vec<(u64, f64)> {
        match self {
            PumpSpec::Fock(n) => vec![(*n, 1.0)],
            PumpSpec::NumberDistribution(w) => w.clone(),
        }
    }

    /// Expected pump photon number `Σ w_i n_i`.
    pub fn mean_photons(&self) -> f64 {
        self.components().iter().map(|&(n, w)| w * n as f64).sum()
    }
}

/// Coupling coefficients `c_1..c_n` of the manifold generator.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingLadder {
    n: usize,
    c: Vec<f64>,
}

impl CouplingLadder {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `c[k-1]` holds `c_k`.
    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    /// `c_k` for `1 ≤ k ≤ n`, zero outside that range.
    #[inline]
    pub fn coupling(&self, k: usize) -> f64 {
        if k == 0 || k > self.n {
            0.0
        } else {
            self.c[k - 1]
        }
    }

    pub fn max_coupling(&self) -> f64 {
        self.c.iter().fold(0.0_f64, |m, &c| m.max(c.abs()))
    }

    /// Ladder for a generator multiplied by `factor`.
    ///
    /// A factor of 2 is a change of time unit; a factor of −1 runs the
    /// dynamics backwards. Scaled ladders no longer satisfy `c_k > 0` when
    /// `factor < 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        CouplingLadder { n: self.n, c: self.c.iter().map(|c| c * factor).collect() }
    }
}

/// Real amplitudes `f_0..f_n` over `|k,k,n−k⟩` at time `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldAmplitudes {
    pub n: usize,
    pub f: Vec<f64>,
    pub tau: f64,
}

impl ManifoldAmplitudes {
    pub fn norm_sqr(&self) -> f64 {
        self.f.iter().map(|x| x * x).sum()
    }

    /// Probability that all `n` pump photons have converted.
    pub fn full_conversion_probability(&self) -> f64 {
        self.f[self.n] * self.f[self.n]
    }
}

/// Output sampling and integrator tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub tau_max: f64,
    pub n_samples: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl TimeGrid {
    pub const DEFAULT_REL_TOL: f64 = 1e-10;
    pub const DEFAULT_ABS_TOL: f64 = 1e-12;

    pub fn new(tau_max: f64, n_samples: usize) -> Result<Self, ModelError> {
        Self::with_tolerances(tau_max, n_samples, Self::DEFAULT_REL_TOL, Self::DEFAULT_ABS_TOL)
    }

    pub fn with_tolerances(
        tau_max: f64,
        n_samples: usize,
        rel_tol: f64,
        abs_tol: f64,
    ) -> Result<Self, ModelError> {
        if !(tau_max.is_finite() && tau_max > 0.0) {
            return Err(ModelError::InvalidGrid(format!("tau_max must be positive, got {tau_max}")));
        }
        if n_samples < 2 {
            return Err(ModelError::InvalidGrid(format!("need at least 2 samples, got {n_samples}")));
        }
        if !(rel_tol > 0.0 && abs_tol > 0.0) {
            return Err(ModelError::InvalidGrid("tolerances must be positive".into()));
        }
        Ok(TimeGrid { tau_max, n_samples, rel_tol, abs_tol })
    }

    /// Uniform sample times `0, Δ, …, tau_max`.
    pub fn times(&self) -> Vec<f64> {
        let last = (self.n_samples - 1) as f64;
        (0..self.n_samples)
            .map(|i| if i + 1 == self.n_samples { self.tau_max } else { self.tau_max * i as f64 / last })
            .collect()
    }
}

pub fn build_ladder(n: usize) -> CouplingLadder {
    let c = (1..=n).map(|k| k as f64 * ((n - k + 1) as f64).sqrt()).collect();
    CouplingLadder { n, c }
}

/// All photons in the pump, no pairs: `f = (1, 0, …, 0)` at `τ = 0`.
pub fn initial_state(n: usize) -> ManifoldAmplitudes {
    let mut f = vec![0.0; n + 1];
    f[0] = 1.0;
    ManifoldAmplitudes { n, f, tau: 0.0 }
}

/// `out = G f` for the manifold generator.
pub fn rhs_into(ladder: &CouplingLadder, f: &[f64], out: &mut [f64]) {
    let n = ladder.n;
    debug_assert_eq!(f.len(), n + 1);
    debug_assert_eq!(out.len(), n + 1);
    let c = &ladder.c;
    if n == 0 {
        out[0] = 0.0;
        return;
    }
    out[0] = -c[0] * f[1];
    for k in 1..n {
        out[k] = c[k - 1] * f[k - 1] - c[k] * f[k + 1];
    }
    out[n] = c[n - 1] * f[n - 1];
}

pub fn rhs(ladder: &CouplingLadder, f: &[f64]) -> Result<Vec<f64>, ModelError> {
    if f.len() != ladder.n + 1 {
        return Err(ModelError::DimensionMismatch { expected: ladder.n + 1, found: f.len() });
    }
    let mut out = vec![0.0; f.len()];
    rhs_into(ladder, f, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn ladder_small_cases() {
        assert_eq!(build_ladder(1).coefficients(), &[1.0]);
        let two = build_ladder(2);
        assert_abs_diff_eq!(two.coefficients()[0], 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(two.coefficients()[1], 2.0);
        assert!(build_ladder(0).coefficients().is_empty());
    }

    #[test]
    fn ladder_endpoints_and_shape() {
        // c_{n-1} = (n-1)·sqrt(2) exceeds c_n = n only from n = 4 on
        assert_eq!(build_ladder(3).coefficients(), &[3f64.sqrt(), 2.0 * 2f64.sqrt(), 3.0]);
        for n in [4usize, 7, 50, 1001] {
            let l = build_ladder(n);
            let c = l.coefficients();
            assert_abs_diff_eq!(c[0], (n as f64).sqrt(), epsilon = 1e-12);
            assert_eq!(c[n - 1], n as f64);
            assert!(c.iter().all(|&x| x > 0.0));
            let peak = c.iter().enumerate().fold(0, |b, (i, &x)| if x > c[b] { i } else { b });
            assert!(peak > 0 && peak < n - 1, "n = {n}: peak at {peak}");
            assert!(c[..=peak].windows(2).all(|w| w[1] >= w[0]));
            assert!(c[peak..].windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn ladder_squares_are_integers() {
        for n in 0..=1000usize {
            for (i, &c) in build_ladder(n).coefficients().iter().enumerate() {
                let k = (i + 1) as u64;
                let exact = k * k * (n as u64 - k + 1);
                let sq = c * c;
                assert!((sq - exact as f64).abs() <= 1e-15 * exact as f64 * 4.0, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn initial_states() {
        assert_eq!(initial_state(2).f, vec![1.0, 0.0, 0.0]);
        assert_eq!(initial_state(0).f, vec![1.0]);
        assert_eq!(initial_state(17).norm_sqr(), 1.0);
        assert_eq!(initial_state(17).tau, 0.0);
    }

    #[test]
    fn rhs_examples() {
        let one = build_ladder(1);
        assert_eq!(rhs(&one, &[1.0, 0.0]).unwrap(), vec![0.0, 1.0]);
        assert_eq!(rhs(&one, &[0.0, 1.0]).unwrap(), vec![-1.0, 0.0]);
        let d = rhs(&build_ladder(2), &[0.0, 1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(d[0], -2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(d[1], 0.0);
        assert_eq!(d[2], 2.0);
        assert_eq!(rhs(&build_ladder(0), &[1.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn rhs_rejects_wrong_length() {
        let err = rhs(&build_ladder(3), &[1.0, 0.0]).unwrap_err();
        assert!(matches!(err, ModelError::DimensionMismatch { expected: 4, found: 2 }));
    }

    #[test]
    fn pump_distribution_validation() {
        assert!(PumpSpec::distribution(vec![(1, 0.5), (2, 0.5)]).is_ok());
        assert!(PumpSpec::distribution(vec![(2, 0.5), (1, 0.5)]).is_err());
        assert!(PumpSpec::distribution(vec![(1, 0.5), (1, 0.5)]).is_err());
        assert!(PumpSpec::distribution(vec![(1, 0.6), (2, 0.5)]).is_err());
        assert!(PumpSpec::distribution(vec![(1, -0.5), (2, 1.5)]).is_err());
        assert!(PumpSpec::distribution(vec![]).is_err());
        let p = PumpSpec::distribution(vec![(1, 0.25), (3, 0.75)]).unwrap();
        assert_abs_diff_eq!(p.mean_photons(), 2.5, epsilon = 1e-15);
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(0.0, 10).is_err());
        assert!(TimeGrid::new(1.0, 1).is_err());
        assert!(TimeGrid::with_tolerances(1.0, 3, 0.0, 1e-12).is_err());
        let t = TimeGrid::new(2.0, 5).unwrap().times();
        assert_eq!(t, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    fn vec_strategy(len: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-1.0f64..1.0, len)
    }

    proptest! {
        #[test]
        fn rhs_is_antisymmetric(n in 0usize..200, seed in vec_strategy(201)) {
            let l = build_ladder(n);
            let f = &seed[..=n];
            let d = rhs(&l, f).unwrap();
            let dot: f64 = f.iter().zip(&d).map(|(a, b)| a * b).sum();
            let nrm: f64 = f.iter().map(|x| x * x).sum();
            prop_assert!(dot.abs() <= 1e-12 * nrm.max(1e-300) * (1.0 + l.max_coupling()));
        }

        #[test]
        fn rhs_is_linear(n in 1usize..100, f in vec_strategy(101), g in vec_strategy(101),
                         a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let l = build_ladder(n);
            let (f, g) = (&f[..=n], &g[..=n]);
            let combo: Vec<f64> = f.iter().zip(g).map(|(x, y)| a * x + b * y).collect();
            let lhs = rhs(&l, &combo).unwrap();
            let rf = rhs(&l, f).unwrap();
            let rg = rhs(&l, g).unwrap();
            for k in 0..=n {
                let r = a * rf[k] + b * rg[k];
                prop_assert!((lhs[k] - r).abs() <= 1e-12 * (1.0 + l.max_coupling()));
            }
        }
    }
}
