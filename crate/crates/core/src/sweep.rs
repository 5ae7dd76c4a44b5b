//! Minimal-order detection sweep over the single-qubit family.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::detect::detect;
use crate::error::{Error, Result};
use crate::par::{map_range, Execution};
use crate::state::{computational_basis, pure_density, qubit_beta_basis, PureState, Tolerances};

pub const CSV_HEADER: &str = "alpha,beta,det_h1,det_h2,det_h3,minimal_order,m_l1";

/// `(start, stop, count)` with `count` evenly spaced points including both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl AlphaGrid {
    pub fn value(&self, k: usize) -> f64 {
        self.start + (self.stop - self.start) * k as f64 / (self.count - 1) as f64
    }

    /// Parses `START:STOP:COUNT`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || Error::InvalidParameter(format!("expected START:STOP:COUNT, got {text:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let start = parts[0].trim().parse().map_err(|_| bad())?;
        let stop = parts[1].trim().parse().map_err(|_| bad())?;
        let count = parts[2].trim().parse().map_err(|_| bad())?;
        Ok(Self { start, stop, count })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub alpha: AlphaGrid,
    pub betas: Vec<f64>,
    /// Only orders 1..=3 are written; deeper orders still count for `minimal_order`.
    pub m_max: usize,
    pub tolerances: Tolerances,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alpha.count < 2 {
            return Err(Error::InvalidParameter("alpha count must be at least 2".into()));
        }
        if !self.alpha.start.is_finite() || !self.alpha.stop.is_finite() {
            return Err(Error::InvalidParameter("alpha bounds must be finite".into()));
        }
        if self.betas.is_empty() {
            return Err(Error::InvalidParameter("at least one beta is required".into()));
        }
        if let Some(b) = self.betas.iter().find(|b| !(0.0..=2.0 * PI).contains(*b)) {
            return Err(Error::InvalidParameter(format!("beta {b} outside [0, 2pi]")));
        }
        if self.m_max < 1 {
            return Err(Error::InvalidParameter("m_max must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    /// `det H_1..det H_3`; `NaN` beyond `m_max`.
    pub dets: [f64; 3],
    /// `0` when nothing fired.
    pub minimal_order: usize,
    pub m_l1: f64,
}

impl SweepRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e}",
            self.alpha, self.beta, self.dets[0], self.dets[1], self.dets[2], self.minimal_order, self.m_l1
        )
    }
}

/// Rows ordered by beta, then alpha.
pub fn run_sweep(config: &SweepConfig, exec: Execution) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let a = computational_basis(2)?;
    let n_alpha = config.alpha.count;
    let total = n_alpha * config.betas.len();
    map_range(exec, total, |idx| {
        let beta = config.betas[idx / n_alpha];
        let alpha = config.alpha.value(idx % n_alpha);
        let rho = pure_density(&PureState::qubit(FRAC_PI_2, alpha))?;
        let report = detect(&rho, &a, &qubit_beta_basis(beta), config.m_max, &config.tolerances)?;
        let mut dets = [f64::NAN; 3];
        for (slot, e) in dets.iter_mut().zip(&report.determinants) {
            *slot = e.value;
        }
        Ok(SweepRow {
            alpha,
            beta,
            dets,
            minimal_order: report.minimal_order.unwrap_or(0),
            m_l1: report.reference_m_l1,
        })
    })
    .into_iter()
    .collect()
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 128);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}
