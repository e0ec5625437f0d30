//! Initial-condition samplers for the pump Fock state and the vacuum.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::Gamma;

use super::rng::TrajectoryRng;
use super::Representation;

/// Exact positive-P sample of `|n⟩`.
///
/// Canonical construction: `|μ|² ~ Gamma(n + 1, 1)` with uniform phase (the
/// Husimi function of `|n⟩`), plus a complex Gaussian `g` with `⟨|g|²⟩ = 1`;
/// `γ = μ + g`, `γ⁺ = conj(μ − g)`. Normal-ordered moments `⟨γ⁺ᵏγᵏ⟩` are the
/// Fock values `n!/(n−k)!`.
pub fn sample_pump_fock_pp(n: u64, rng: &mut TrajectoryRng) -> (Complex64, Complex64) {
    let gamma_dist = Gamma::new(n as f64 + 1.0, 1.0).expect("shape is positive");
    let radius_sq: f64 = rng.inner_mut().sample(gamma_dist);
    let mu = Complex64::from_polar(radius_sq.sqrt(), rng.phase());
    let g = Complex64::new(rng.normal(), rng.normal()) * std::f64::consts::FRAC_1_SQRT_2;
    (mu + g, (mu - g).conj())
}

/// Ring approximation of `|n⟩` in the truncated Wigner representation:
/// `γ = sqrt(n + 1/2)·e^{iθ}`. The second symmetric moment misses the Fock
/// value by `1/4`, a relative error of `0.25/(n + 1/2)²`.
pub fn sample_pump_fock_tw(n: u64, rng: &mut TrajectoryRng) -> Complex64 {
    Complex64::from_polar((n as f64 + 0.5).sqrt(), rng.phase())
}

/// Second symmetric moment `E|γ|⁴` of the ring sampler and the Fock value.
pub fn tw_ring_fourth_moment(n: u64) -> (f64, f64) {
    let m = n as f64 + 0.5;
    (m * m, m * m + 0.25)
}

/// Vacuum sample for a signal or idler mode.
///
/// Positive-P: the vacuum is a delta at the origin, `(0, 0)`. Truncated
/// Wigner: complex Gaussian with quadrature variance `1/4`; the partner slot
/// holds the conjugate.
pub fn sample_vacuum(representation: Representation, rng: &mut TrajectoryRng) -> (Complex64, Complex64) {
    match representation {
        Representation::PositiveP => (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
        Representation::TruncatedWigner => {
            let a = Complex64::new(rng.normal(), rng.normal()) * 0.5;
            (a, a.conj())
        }
    }
}
