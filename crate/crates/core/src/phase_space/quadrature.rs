//! Noise-free truncated Wigner mean by Gauss quadrature over the initial
//! conditions.
//!
//! With the pump on its ring, the drift is invariant under
//! `α → αe^{iφ}, β → βe^{−iφ}` and under a common pump/pair phase rotation, so
//! `⟨|α(τ)|²⟩` depends on three real initial variables. Writing
//! `s = α + β*`, `d = α − β*` (independent, `E|s|² = E|d|² = 1`), the phase of
//! `s` and of the pump can be fixed. `|s|² = e^v` with `|s|² ~ Exp(1)` and the
//! two quadratures of `d` are integrated on product nodes. The amplified
//! quadrature `s` sets the depletion time through `ln|s|²`, so the integrand
//! is smooth in `v` but not polynomial in `|s|²`; composite Gauss–Legendre
//! panels in `v` converge where Gauss–Laguerre in `|s|²` does not. The
//! resulting mean carries no sampling error, so the systematic truncation
//! error of the method can be resolved at large `n`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use super::ensemble::pairwise_sum;
use super::sde::tw_step;
use super::{Scheme, WignerState};
use crate::model::TimeGrid;

/// Golub–Welsch nodes and weights for a symmetric Jacobi matrix.
fn golub_welsch(diag: &[f64], off: &[f64], mass: f64) -> Vec<(f64, f64)> {
    let m = diag.len();
    let mut j = DMatrix::zeros(m, m);
    for i in 0..m {
        j[(i, i)] = diag[i];
        if i + 1 < m {
            j[(i, i + 1)] = off[i];
            j[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(j);
    let mut nodes: Vec<(f64, f64)> = (0..m)
        .map(|i| (eig.eigenvalues[i], mass * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    nodes
}

/// Nodes for `∫₀^∞ f(u) e^{−u} du`.
pub fn gauss_laguerre(m: usize) -> Vec<(f64, f64)> {
    let diag: Vec<f64> = (0..m).map(|i| (2 * i + 1) as f64).collect();
    let off: Vec<f64> = (1..m).map(|i| i as f64).collect();
    golub_welsch(&diag, &off, 1.0)
}

/// Nodes for `∫₋₁¹ f(x) dx`.
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let diag = vec![0.0; m];
    let off: Vec<f64> = (1..m).map(|k| k as f64 / ((4 * k * k - 1) as f64).sqrt()).collect();
    golub_welsch(&diag, &off, 2.0)
}

/// Nodes for `E[f(U)]`, `U ~ Exp(1)`, as `(u, weight)`: composite
/// Gauss–Legendre in `v = ln u` over `[v_min, v_max]`.
pub fn exponential_log_nodes(v_min: f64, v_max: f64, panels: usize, per_panel: usize) -> Vec<(f64, f64)> {
    let rule = gauss_legendre(per_panel);
    let width = (v_max - v_min) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * per_panel);
    for p in 0..panels {
        let mid = v_min + (p as f64 + 0.5) * width;
        for &(x, w) in &rule {
            let v = mid + 0.5 * width * x;
            let u = v.exp();
            // density of v is e^{v − e^v}
            nodes.push((u, 0.5 * width * w * (v - u).exp()));
        }
    }
    nodes
}

/// Nodes for `E[f(X)]`, `X ~ N(0, 1)`.
pub fn gauss_hermite(m: usize) -> Vec<(f64, f64)> {
    let diag = vec![0.0; m];
    let off: Vec<f64> = (1..m).map(|i| (i as f64).sqrt()).collect();
    golub_welsch(&diag, &off, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerQuadrature {
    /// Range of `ln|s|²` covered by the radial panels.
    pub log_range: (f64, f64),
    pub radial_panels: usize,
    pub panel_nodes: usize,
    pub hermite_nodes: usize,
    pub dt: f64,
    pub scheme: Scheme,
}

impl WignerQuadrature {
    /// Panels of width 1/2 in `ln|s|²` over `[−36, 4]`; the excluded mass is
    /// below `1e−15`.
    pub fn standard(panel_nodes: usize, hermite_nodes: usize, dt: f64) -> Self {
        WignerQuadrature {
            log_range: (-36.0, 4.0),
            radial_panels: 80,
            panel_nodes,
            hermite_nodes,
            dt,
            scheme: Scheme::SemiImplicitMidpoint,
        }
    }

    pub fn trajectories(&self) -> usize {
        self.radial_panels * self.panel_nodes * self.hermite_nodes * self.hermite_nodes
    }
}

/// Truncated Wigner `μ(τ) = (⟨|α|²⟩ − 1/2)/n` on `grid` from quadrature.
pub fn tw_quadrature_mu(n: u64, grid: &TimeGrid, q: &WignerQuadrature) -> Vec<f64> {
    let taus = grid.times();
    if n == 0 {
        return vec![0.0; taus.len()];
    }
    let radial = exponential_log_nodes(q.log_range.0, q.log_range.1, q.radial_panels, q.panel_nodes);
    let normal = gauss_hermite(q.hermite_nodes);
    let mut nodes = Vec::with_capacity(q.trajectories());
    for &(u, wu) in &radial {
        for &(x, wx) in &normal {
            for &(y, wy) in &normal {
                let s = Complex64::new(u.sqrt(), 0.0);
                let d = Complex64::new(x, y) * std::f64::consts::FRAC_1_SQRT_2;
                let start = WignerState {
                    alpha: (s + d) * 0.5,
                    beta: ((s - d) * 0.5).conj(),
                    gamma: Complex64::new((n as f64 + 0.5).sqrt(), 0.0),
                };
                nodes.push((start, wu * wx * wy));
            }
        }
    }
    let weight_total = pairwise_sum(&nodes.iter().map(|(_, w)| *w).collect::<Vec<_>>());

    let per_node: Vec<Vec<f64>> = nodes
        .par_iter()
        .map(|&(start, w)| {
            let mut s = start;
            let mut t = taus[0];
            taus.iter()
                .map(|&target| {
                    let span = target - t;
                    if span > 0.0 {
                        let steps = (span / q.dt).ceil().max(1.0) as usize;
                        let h = span / steps as f64;
                        for _ in 0..steps {
                            s = tw_step(&s, h, q.scheme);
                        }
                    }
                    t = target;
                    w * s.alpha.norm_sqr()
                })
                .collect()
        })
        .collect();

    let mut column = vec![0.0; per_node.len()];
    (0..taus.len())
        .map(|i| {
            for (c, row) in column.iter_mut().zip(&per_node) {
                *c = row[i];
            }
            (pairwise_sum(&column) / weight_total - 0.5) / n as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laguerre_integrates_polynomials() {
        let nodes = gauss_laguerre(10);
        for k in 0..=19u32 {
            let q: f64 = nodes.iter().map(|(u, w)| w * u.powi(k as i32)).sum();
            let exact: f64 = (1..=k).map(|i| i as f64).product();
            assert!((q - exact).abs() <= 1e-9 * exact.max(1.0), "k={k}: {q} vs {exact}");
        }
    }

    #[test]
    fn hermite_integrates_gaussian_moments() {
        let nodes = gauss_hermite(8);
        let moments = [1.0, 0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0];
        for (k, &exact) in moments.iter().enumerate() {
            let q: f64 = nodes.iter().map(|(x, w)| w * x.powi(k as i32)).sum();
            assert!((q - exact).abs() < 1e-10, "k={k}: {q}");
        }
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let nodes = gauss_legendre(6);
        for k in 0..=11i32 {
            let q: f64 = nodes.iter().map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 0 { 2.0 / (k + 1) as f64 } else { 0.0 };
            assert!((q - exact).abs() < 1e-13, "k={k}: {q}");
        }
    }

    #[test]
    fn log_nodes_reproduce_exponential_moments() {
        let nodes = exponential_log_nodes(-36.0, 4.0, 80, 6);
        let mass: f64 = nodes.iter().map(|(_, w)| w).sum();
        let mean: f64 = nodes.iter().map(|(u, w)| u * w).sum();
        let log_mean: f64 = nodes.iter().map(|(u, w)| u.ln() * w).sum();
        assert!((mass - 1.0).abs() < 1e-12, "{mass}");
        assert!((mean - 1.0).abs() < 1e-10, "{mean}");
        // E[ln U] = −γ_Euler
        assert!((log_mean + 0.577_215_664_901_532_9).abs() < 1e-10, "{log_mean}");
    }

    #[test]
    fn vacuum_occupation_is_one_half_at_start() {
        let grid = TimeGrid::new(0.01, 2).unwrap();
        let q = WignerQuadrature::standard(6, 4, 1e-3);
        let mu = tw_quadrature_mu(20, &grid, &q);
        assert!(mu[0].abs() < 1e-12, "{}", mu[0]);
    }

    #[test]
    fn short_time_growth_matches_linearised_pump() {
        // undepleted pump: ⟨|α|²⟩ − 1/2 = sinh²(gτ), g² = n + 1/2
        let n = 400u64;
        let tau = 0.01;
        let grid = TimeGrid::new(tau, 2).unwrap();
        let q = WignerQuadrature::standard(4, 6, 1e-5);
        let mu = tw_quadrature_mu(n, &grid, &q)[1];
        let g = (n as f64 + 0.5).sqrt();
        let linear = (g * tau).sinh().powi(2) / n as f64;
        assert!((mu - linear).abs() / linear < 2e-2, "{mu} vs {linear}");
    }
}
