//! Dense reference propagator: `exp(τA)·f0` for the manifold generator `A`,
//! by scaling and squaring around a degree-12 Taylor polynomial.
//!
//! Shares nothing with the Runge–Kutta path except the definition of the
//! generator entries, which it computes itself. Only meant for small `n`.

use nalgebra::{DMatrix, DVector};

use crate::error::{ModelError, OracleError};

pub const MAX_ORACLE_N: usize = 512;
const TAYLOR_DEGREE: u32 = 12;
const SCALED_NORM: f64 = 0.5;

/// Dense `(n+1)×(n+1)` generator with `A[k][k−1] = c_k`, `A[k][k+1] = −c_{k+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseGenerator {
    n: usize,
    a: DMatrix<f64>,
}

impl DenseGenerator {
    pub fn new(n: usize) -> Result<Self, OracleError> {
        Self::with_scale(n, 1.0)
    }

    /// Generator multiplied by `scale`.
    pub fn with_scale(n: usize, scale: f64) -> Result<Self, OracleError> {
        if n > MAX_ORACLE_N {
            return Err(OracleError::TooLarge { n, limit: MAX_ORACLE_N });
        }
        let mut a = DMatrix::zeros(n + 1, n + 1);
        for k in 1..=n {
            // <k,k,n-k| a†b†c |k-1,k-1,n-k+1> = k·sqrt(n-k+1)
            let c = scale * (k as f64) * ((n + 1 - k) as f64).sqrt();
            a[(k, k - 1)] = c;
            a[(k - 1, k)] = -c;
        }
        Ok(DenseGenerator { n, a })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// `exp(τA)` as a dense matrix.
    pub fn exp(&self, tau: f64) -> DMatrix<f64> {
        let dim = self.n + 1;
        if tau == 0.0 {
            return DMatrix::identity(dim, dim);
        }
        let m = &self.a * tau;
        let norm = one_norm(&m);
        let squarings = if norm > SCALED_NORM { (norm / SCALED_NORM).log2().ceil() as i32 } else { 0 };
        let x = m / 2f64.powi(squarings);

        // Horner form of Σ_{j≤12} X^j / j!
        let ident = DMatrix::<f64>::identity(dim, dim);
        let mut poly = ident.clone();
        for j in (1..=TAYLOR_DEGREE).rev() {
            poly = &ident + (&x * poly) / j as f64;
        }
        for _ in 0..squarings {
            poly = &poly * &poly;
        }
        poly
    }
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// `exp(τA)·f0`.
pub fn expm_propagate(f0: &[f64], generator: &DenseGenerator, tau: f64) -> Result<Vec<f64>, OracleError> {
    if f0.len() != generator.n + 1 {
        return Err(ModelError::DimensionMismatch { expected: generator.n + 1, found: f0.len() }.into());
    }
    if tau == 0.0 {
        return Ok(f0.to_vec());
    }
    let v = DVector::from_column_slice(f0);
    Ok((generator.exp(tau) * v).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn unit(n: usize) -> Vec<f64> {
        let mut f = vec![0.0; n + 1];
        f[0] = 1.0;
        f
    }

    #[test]
    fn generator_is_antisymmetric() {
        for n in [0usize, 1, 5, 40] {
            let g = DenseGenerator::new(n).unwrap();
            let sum = g.matrix() + g.matrix().transpose();
            assert!(sum.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn quarter_rotation() {
        let out = expm_propagate(&[1.0, 0.0], &DenseGenerator::new(1).unwrap(), FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(out[0], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(out[1], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn zero_time_is_identity() {
        let f0 = vec![0.3, -0.4, 0.5, 0.1];
        assert_eq!(expm_propagate(&f0, &DenseGenerator::new(3).unwrap(), 0.0).unwrap(), f0);
    }

    #[test]
    fn three_level_peak() {
        let tau = std::f64::consts::PI / 6f64.sqrt();
        let out = expm_propagate(&unit(2), &DenseGenerator::new(2).unwrap(), tau).unwrap();
        // c_2 f_0 + c_1 f_2 is conserved, so f_0 = (c_2² + c_1² cos ωτ)/ω² = (4 − 2)/6 at ωτ = π
        assert_abs_diff_eq!(out[0], 1.0 / 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(out[1], 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(out[2], 2.0 * 2f64.sqrt() / 3.0, epsilon = 1e-8);
    }

    #[test]
    fn orthogonal_propagation() {
        for n in [1usize, 4, 8, 30] {
            let g = DenseGenerator::new(n).unwrap();
            for tau in [0.1, 1.0, 4.7] {
                let out = expm_propagate(&unit(n), &g, tau).unwrap();
                let norm: f64 = out.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-12, "n={n} tau={tau}: {norm}");
            }
        }
    }

    #[test]
    fn semigroup() {
        let g = DenseGenerator::new(6).unwrap();
        let f0 = unit(6);
        let two_steps = expm_propagate(&expm_propagate(&f0, &g, 0.7).unwrap(), &g, 1.9).unwrap();
        let one_step = expm_propagate(&f0, &g, 2.6).unwrap();
        for (a, b) in two_steps.iter().zip(&one_step) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn refuses_large_n() {
        assert!(matches!(DenseGenerator::new(513), Err(OracleError::TooLarge { n: 513, .. })));
        assert!(DenseGenerator::new(512).is_ok());
    }
}
