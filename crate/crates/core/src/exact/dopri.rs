//! Dormand–Prince 5(4) with FSAL and the standard fourth-order continuous
//! extension, specialised to the tridiagonal manifold generator.
//!
//! Every stage buffer is a contiguous `Vec<f64>` of length `n + 1`; ten such
//! buffers are the whole working set.

use crate::error::SolverError;
use crate::model::{rhs_into, CouplingLadder};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepCounts {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct Dopri5<'a> {
    ladder: &'a CouplingLadder,
    rel_tol: f64,
    abs_tol: f64,
    t: f64,
    h: f64,
    y: Vec<f64>,
    // previous accepted state once a step has been taken, candidate otherwise
    y_other: Vec<f64>,
    stage: Vec<f64>,
    k: [Vec<f64>; 7],
    t_prev: f64,
    h_last: f64,
    has_dense: bool,
    counts: StepCounts,
}

impl<'a> Dopri5<'a> {
    pub fn new(ladder: &'a CouplingLadder, y0: &[f64], t0: f64, rel_tol: f64, abs_tol: f64) -> Self {
        let dim = ladder.n() + 1;
        assert_eq!(y0.len(), dim, "state length must be n + 1");
        let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; dim]);
        rhs_into(ladder, y0, &mut k[0]);
        let scale = ladder.max_coupling();
        let h = if scale > 0.0 { 0.1 / scale } else { 1.0 };
        Dopri5 {
            ladder,
            rel_tol,
            abs_tol,
            t: t0,
            h,
            y: y0.to_vec(),
            y_other: vec![0.0; dim],
            stage: vec![0.0; dim],
            k,
            t_prev: t0,
            h_last: 0.0,
            has_dense: false,
            counts: StepCounts { rhs_evaluations: 1, ..Default::default() },
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn counts(&self) -> StepCounts {
        self.counts
    }

    /// Interval `[t_prev, t]` covered by the last accepted step.
    pub fn last_step(&self) -> Option<(f64, f64)> {
        self.has_dense.then_some((self.t_prev, self.t))
    }

    /// Takes one accepted step that does not pass `t_limit`. Lands exactly on
    /// `t_limit` when the step reaches it.
    pub fn step(&mut self, t_limit: f64) -> Result<(), SolverError> {
        let remaining = t_limit - self.t;
        if remaining <= 0.0 {
            return Ok(());
        }
        let min_step = 1e-14 * self.t.abs().max(remaining).max(1e-300);
        let mut fac_max = FAC_MAX;
        loop {
            let mut h = self.h.min(remaining);
            let hits_limit = h >= remaining * (1.0 - 1e-12);
            if hits_limit {
                h = remaining;
            }
            if h < min_step && !hits_limit {
                return Err(SolverError::StepSizeUnderflow { last_good_tau: self.t, step: h });
            }
            let err = self.attempt(h);
            if !err.is_finite() {
                if h < min_step {
                    return Err(SolverError::NonFinite { last_good_tau: self.t });
                }
                self.h = h * FAC_MIN;
                self.counts.rejected += 1;
                fac_max = 1.0;
                continue;
            }
            let fac = if err == 0.0 { fac_max } else { (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, fac_max) };
            if err <= 1.0 {
                self.t_prev = self.t;
                self.t = if hits_limit { t_limit } else { self.t + h };
                self.h_last = h;
                std::mem::swap(&mut self.y, &mut self.y_other);
                // FSAL: k7 = f(y_new) becomes next k1; the old k1 moves to slot 7
                // and is overwritten by the next attempt.
                self.k.swap(0, 6);
                self.has_dense = true;
                self.counts.accepted += 1;
                // a limit-clamped step says nothing about the natural step size
                if !hits_limit || fac < 1.0 {
                    self.h = h * fac;
                }
                return Ok(());
            }
            self.counts.rejected += 1;
            fac_max = 1.0;
            self.h = h * fac;
        }
    }

    /// Steps until `t == t_target` exactly.
    pub fn advance_to(&mut self, t_target: f64) -> Result<(), SolverError> {
        while self.t < t_target {
            self.step(t_target)?;
        }
        Ok(())
    }

    /// Component `i` of the continuous extension at `t` inside the last step.
    pub fn dense_component(&self, i: usize, t: f64) -> f64 {
        debug_assert!(self.has_dense);
        if self.h_last == 0.0 {
            return self.y[i];
        }
        // after acceptance y_other holds the step start and k[6] the old k1
        let theta = ((t - self.t_prev) / self.h_last).clamp(0.0, 1.0);
        let y0 = self.y_other[i];
        let y1 = self.y[i];
        let h = self.h_last;
        let k = &self.k;
        let k1 = k[6][i];
        let k7 = k[0][i];
        let ydiff = y1 - y0;
        let bspl = h * k1 - ydiff;
        let r4 = ydiff - h * k7 - bspl;
        let r5 = h * (D1 * k1 + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k7);
        let theta1 = 1.0 - theta;
        y0 + theta * (ydiff + theta1 * (bspl + theta * (r4 + theta1 * r5)))
    }

    /// Runs the stages for step size `h`, leaving the candidate in `y_other`
    /// and `f(candidate)` in `k[6]`. Returns the scaled RMS error.
    fn attempt(&mut self, h: f64) -> f64 {
        let ladder = self.ladder;
        let y = &self.y;
        let stage = &mut self.stage;
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;

        for i in 0..y.len() {
            stage[i] = y[i] + h * A21 * k1[i];
        }
        rhs_into(ladder, stage, k2);
        for i in 0..y.len() {
            stage[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs_into(ladder, stage, k3);
        for i in 0..y.len() {
            stage[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs_into(ladder, stage, k4);
        for i in 0..y.len() {
            stage[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs_into(ladder, stage, k5);
        for i in 0..y.len() {
            stage[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        rhs_into(ladder, stage, k6);
        let y_new = &mut self.y_other;
        for i in 0..y.len() {
            y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        rhs_into(ladder, y_new, k7);
        self.counts.rhs_evaluations += 6;

        let mut acc = 0.0;
        for i in 0..y.len() {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.abs_tol + self.rel_tol * y[i].abs().max(y_new[i].abs());
            let r = e / sc;
            acc += r * r;
        }
        (acc / y.len() as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_ladder;

    #[test]
    fn two_level_rotation() {
        let ladder = build_ladder(1);
        let mut rk = Dopri5::new(&ladder, &[1.0, 0.0], 0.0, 1e-12, 1e-14);
        rk.advance_to(std::f64::consts::FRAC_PI_2).unwrap();
        assert_eq!(rk.t(), std::f64::consts::FRAC_PI_2);
        assert!(rk.y()[0].abs() < 1e-10);
        assert!((rk.y()[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dense_output_tracks_sine() {
        let ladder = build_ladder(1);
        let mut rk = Dopri5::new(&ladder, &[1.0, 0.0], 0.0, 1e-10, 1e-12);
        let mut worst = 0.0_f64;
        while rk.t() < 3.0 {
            rk.step(3.0).unwrap();
            let (a, b) = rk.last_step().unwrap();
            for j in 0..=10 {
                let t = a + (b - a) * j as f64 / 10.0;
                worst = worst.max((rk.dense_component(1, t) - t.sin()).abs());
            }
        }
        assert!(worst < 1e-8, "dense output error {worst}");
    }

    #[test]
    fn empty_dynamics_is_a_fixed_point() {
        let ladder = build_ladder(0);
        let mut rk = Dopri5::new(&ladder, &[1.0], 0.0, 1e-10, 1e-12);
        rk.advance_to(100.0).unwrap();
        assert_eq!(rk.y(), &[1.0]);
    }
}
