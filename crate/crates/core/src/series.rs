use serde::{Deserialize, Serialize};

use crate::model::PumpSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Exact,
    PositiveP,
    TruncatedWigner,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::PositiveP => "positive-p",
            Method::TruncatedWigner => "truncated-wigner",
        }
    }
}

/// Mean conversion efficiency `μ(τ)` on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencySeries {
    pub taus: Vec<f64>,
    pub mu: Vec<f64>,
    /// Standard errors; `None` for the exact method.
    pub se: Option<Vec<f64>>,
    pub method: Method,
    pub pump: PumpSpec,
}

impl EfficiencySeries {
    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    /// Checks ordering and the `0 ≤ μ ≤ 1 + 5·se` envelope.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.mu.len() != self.taus.len() {
            return Err("mu and taus differ in length".into());
        }
        if let Some(se) = &self.se {
            if se.len() != self.taus.len() {
                return Err("se and taus differ in length".into());
            }
        }
        if self.taus.windows(2).any(|w| w[1] <= w[0]) {
            return Err("taus not strictly increasing".into());
        }
        for (i, &m) in self.mu.iter().enumerate() {
            let slack = self.se.as_ref().map_or(1e-9, |se| 5.0 * se[i] + 1e-9);
            if !m.is_finite() {
                continue;
            }
            if m < -slack || m > 1.0 + slack {
                return Err(format!("mu[{i}] = {m} outside [0, 1] (slack {slack})"));
            }
        }
        Ok(())
    }
}
