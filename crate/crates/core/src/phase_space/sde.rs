//! Phase-space equations for `H ∝ i(a†b†c − a b c†)`.
//!
//! Positive-P (Itô):
//!
//! ```text
//! dα  = β⁺γ dt  + sqrt(γ/2)(dw₁ + i dw₂)      dα⁺ = βγ⁺ dt + sqrt(γ⁺/2)(dw₃ + i dw₄)
//! dβ  = α⁺γ dt  + sqrt(γ/2)(dw₁ − i dw₂)      dβ⁺ = αγ⁺ dt + sqrt(γ⁺/2)(dw₃ − i dw₄)
//! dγ  = −αβ dt                                dγ⁺ = −α⁺β⁺ dt
//! ```
//!
//! The only non-zero diffusion entries are `D_{αβ} = γ` and `D_{α⁺β⁺} = γ⁺`.
//! No noise coefficient depends on the variable it multiplies, so the Itô and
//! Stratonovich forms coincide and the midpoint scheme needs no correction.
//!
//! Truncated Wigner keeps the same drift with `⁺ → conj` and no noise.

use num_complex::Complex64;

use super::rng::TrajectoryRng;
use super::{PositivePState, Scheme, WignerState};

const MIDPOINT_ITERATIONS: usize = 3;

pub type NoiseMatrix = [[Complex64; 4]; 6];
pub type DiffusionMatrix = [[Complex64; 6]; 6];

/// Variable order used by [`noise_matrix`] and [`diffusion_matrix`].
pub const PP_VARIABLES: [&str; 6] = ["alpha", "beta", "gamma", "alpha+", "beta+", "gamma+"];

pub fn pp_drift(s: &PositivePState) -> PositivePState {
    PositivePState {
        alpha: s.beta_p * s.gamma,
        beta: s.alpha_p * s.gamma,
        gamma: -s.alpha * s.beta,
        alpha_p: s.beta * s.gamma_p,
        beta_p: s.alpha * s.gamma_p,
        gamma_p: -s.alpha_p * s.beta_p,
    }
}

pub fn tw_drift(s: &WignerState) -> WignerState {
    WignerState { alpha: s.beta.conj() * s.gamma, beta: s.alpha.conj() * s.gamma, gamma: -s.alpha * s.beta }
}

/// `B` with `B·Bᵀ = D`, columns `dw₁..dw₄`, rows in [`PP_VARIABLES`] order.
pub fn noise_matrix(gamma: Complex64, gamma_p: Complex64) -> NoiseMatrix {
    let z = Complex64::new(0.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let g = (gamma / 2.0).sqrt();
    let gp = (gamma_p / 2.0).sqrt();
    [[g, g * i, z, z], [g, -g * i, z, z], [z; 4], [z, z, gp, gp * i], [z, z, gp, -gp * i], [z; 4]]
}

pub fn diffusion_matrix(gamma: Complex64, gamma_p: Complex64) -> DiffusionMatrix {
    let mut d = [[Complex64::new(0.0, 0.0); 6]; 6];
    d[0][1] = gamma;
    d[1][0] = gamma;
    d[3][4] = gamma_p;
    d[4][3] = gamma_p;
    d
}

/// `B·Bᵀ` (plain transpose; the positive-P diffusion is complex symmetric).
pub fn noise_outer(b: &NoiseMatrix) -> DiffusionMatrix {
    let mut out = [[Complex64::new(0.0, 0.0); 6]; 6];
    for r in 0..6 {
        for c in 0..6 {
            out[r][c] = (0..4).map(|k| b[r][k] * b[c][k]).sum();
        }
    }
    out
}

fn pp_increment(s: &PositivePState, dt: f64, dw: &[f64; 4]) -> PositivePState {
    let a = pp_drift(s);
    let g = (s.gamma / 2.0).sqrt();
    let gp = (s.gamma_p / 2.0).sqrt();
    let w12 = Complex64::new(dw[0], dw[1]);
    let w12c = Complex64::new(dw[0], -dw[1]);
    let w34 = Complex64::new(dw[2], dw[3]);
    let w34c = Complex64::new(dw[2], -dw[3]);
    PositivePState {
        alpha: a.alpha * dt + g * w12,
        beta: a.beta * dt + g * w12c,
        gamma: a.gamma * dt,
        alpha_p: a.alpha_p * dt + gp * w34,
        beta_p: a.beta_p * dt + gp * w34c,
        gamma_p: a.gamma_p * dt,
    }
}

/// One step with given Wiener increments (each of variance `dt`).
pub fn pp_step_with(s: &PositivePState, dt: f64, dw: &[f64; 4], scheme: Scheme) -> PositivePState {
    match scheme {
        Scheme::EulerMaruyama => s.add(&pp_increment(s, dt, dw)),
        Scheme::SemiImplicitMidpoint => {
            let mut mid = *s;
            for _ in 0..MIDPOINT_ITERATIONS {
                mid = s.add(&pp_increment(&mid, dt, dw).scale(0.5));
            }
            mid.scale(2.0).add(&s.scale(-1.0))
        }
    }
}

pub fn pp_step(s: &PositivePState, dt: f64, scheme: Scheme, rng: &mut TrajectoryRng) -> PositivePState {
    let sd = dt.sqrt();
    let dw = [rng.normal() * sd, rng.normal() * sd, rng.normal() * sd, rng.normal() * sd];
    pp_step_with(s, dt, &dw, scheme)
}

pub fn tw_step(s: &WignerState, dt: f64, scheme: Scheme) -> WignerState {
    match scheme {
        Scheme::EulerMaruyama => s.add(&tw_drift(s).scale(dt)),
        Scheme::SemiImplicitMidpoint => {
            let mut mid = *s;
            for _ in 0..MIDPOINT_ITERATIONS {
                mid = s.add(&tw_drift(&mid).scale(0.5 * dt));
            }
            mid.scale(2.0).add(&s.scale(-1.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pump_only_is_a_fixed_point() {
        let zero = PositivePState::default();
        for scheme in [Scheme::EulerMaruyama, Scheme::SemiImplicitMidpoint] {
            let mut rng = TrajectoryRng::new(9, 0);
            assert_eq!(pp_step(&zero, 0.3, scheme, &mut rng), zero);
        }
        let ring = WignerState { alpha: c(0.0, 0.0), beta: c(0.0, 0.0), gamma: Complex64::from_polar(3.2, 1.1) };
        for scheme in [Scheme::EulerMaruyama, Scheme::SemiImplicitMidpoint] {
            let mut s = ring;
            for _ in 0..100 {
                s = tw_step(&s, 0.01, scheme);
            }
            assert_eq!(s, ring);
        }
    }

    #[test]
    fn unit_pump_noise_correlations() {
        let d = noise_outer(&noise_matrix(c(1.0, 0.0), c(1.0, 0.0)));
        let expected = [[0.0, 1.0], [1.0, 0.0]];
        for r in 0..2 {
            for col in 0..2 {
                assert!((d[r][col] - c(expected[r][col], 0.0)).norm() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn noise_factorises_diffusion(gr in -50.0f64..50.0, gi in -50.0f64..50.0,
                                      hr in -50.0f64..50.0, hi in -50.0f64..50.0) {
            let (g, h) = (c(gr, gi), c(hr, hi));
            let bb = noise_outer(&noise_matrix(g, h));
            let d = diffusion_matrix(g, h);
            for r in 0..6 {
                for col in 0..6 {
                    prop_assert!((bb[r][col] - d[r][col]).norm() <= 1e-12 * (1.0 + g.norm() + h.norm()));
                }
            }
        }
    }

    fn manley_rowe(s: &WignerState) -> (f64, f64) {
        (s.alpha.norm_sqr() + s.gamma.norm_sqr(), s.alpha.norm_sqr() - s.beta.norm_sqr())
    }

    #[test]
    fn wigner_trajectory_conserves_manley_rowe() {
        let start = WignerState { alpha: c(0.3, -0.2), beta: c(-0.1, 0.4), gamma: c(3.0, 0.5) };
        let (i0, j0) = manley_rowe(&start);
        let dt = 1e-3;
        let mut s = start;
        let mut worst: f64 = 0.0;
        let mut peak_signal: f64 = 0.0;
        for _ in 0..2000 {
            s = tw_step(&s, dt, Scheme::SemiImplicitMidpoint);
            let (i, j) = manley_rowe(&s);
            worst = worst.max((i - i0).abs() / i0).max((j - j0).abs() / i0);
            peak_signal = peak_signal.max(s.alpha.norm_sqr());
        }
        // two units of time; midpoint conserves quadratic invariants up to its fixed-point iteration
        assert!(worst < 2.0 * 10.0 * dt * dt, "relative drift {worst:e}");
        assert!(peak_signal > 4.0, "pump never depleted: {peak_signal}");
    }

    #[test]
    fn midpoint_is_second_order_for_wigner() {
        let start = WignerState { alpha: c(0.5, 0.1), beta: c(0.2, -0.3), gamma: c(2.0, 0.0) };
        let run = |dt: f64| {
            let mut s = start;
            for _ in 0..(1.0 / dt).round() as usize {
                s = tw_step(&s, dt, Scheme::SemiImplicitMidpoint);
            }
            s
        };
        let reference = run(1e-4);
        let e1 = (run(1e-2).alpha - reference.alpha).norm();
        let e2 = (run(5e-3).alpha - reference.alpha).norm();
        assert!(e1 / e2 > 3.0, "ratio {}", e1 / e2);
    }
}
