//! Moment-based imaginarity detection.
//!
//! Pipeline: Y-twirl the state, build the extended KD tensor against a mutually
//! unbiased pair, take moments up to `r_{2 m_max + 1}`, and scan `det H_m` for
//! `m = 1..=m_max`. A determinant below `-eps_det` certifies that the twirled
//! distribution is nonpositive, hence that the state carries imaginarity. The test is
//! sufficient only: "not detected" never means "real".

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaginarity::{l1_imaginarity, y_twirl};
use crate::kd::extended_kd;
use crate::moments::{hankel, moments, MomentSequence};
use crate::par::{map_slice, Execution};
use crate::state::{validate_mub, DensityMatrix, OrthonormalBasis, Tolerances};

/// Default deepest Hankel order.
pub const DEFAULT_M_MAX: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "detected")]
    Detected,
    #[serde(rename = "not detected")]
    NotDetected,
    /// No determinant fired, at least one sat inside the zero band, and the state
    /// does carry imaginarity. Raising `m_max` or lowering `eps_det` may resolve it.
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetSign {
    Negative,
    Nonnegative,
    WithinToleranceOfZero,
}

impl DetSign {
    pub fn classify(value: f64, eps_det: f64) -> Self {
        if value < -eps_det {
            DetSign::Negative
        } else if value < eps_det {
            DetSign::WithinToleranceOfZero
        } else {
            DetSign::Nonnegative
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeterminantEntry {
    pub order: usize,
    pub value: f64,
    pub sign: DetSign,
}

/// Inputs echoed into a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParameters {
    pub dim: usize,
    pub basis_a: String,
    pub basis_b: String,
    pub m_max: usize,
    pub tolerances: Tolerances,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub verdict: Verdict,
    pub minimal_order: Option<usize>,
    pub determinants: Vec<DeterminantEntry>,
    #[serde(rename = "reference_M_l1")]
    pub reference_m_l1: f64,
    pub moments: MomentSequence,
    pub parameters: ReportParameters,
}

impl DetectionReport {
    pub fn detected(&self) -> bool {
        self.verdict == Verdict::Detected
    }

    pub fn determinant(&self, order: usize) -> Option<f64> {
        self.determinants
            .iter()
            .find(|e| e.order == order)
            .map(|e| e.value)
    }
}

/// Labels used in report parameters.
#[derive(Debug, Clone, Copy)]
pub struct BasisLabels<'a> {
    pub a: &'a str,
    pub b: &'a str,
}

impl Default for BasisLabels<'_> {
    fn default() -> Self {
        Self {
            a: "computational",
            b: "custom",
        }
    }
}

pub fn detect(
    rho: &DensityMatrix,
    basis_a: &OrthonormalBasis,
    basis_b: &OrthonormalBasis,
    m_max: usize,
    tol: &Tolerances,
) -> Result<DetectionReport> {
    detect_labeled(rho, basis_a, basis_b, m_max, tol, BasisLabels::default())
}

pub fn detect_labeled(
    rho: &DensityMatrix,
    basis_a: &OrthonormalBasis,
    basis_b: &OrthonormalBasis,
    m_max: usize,
    tol: &Tolerances,
    labels: BasisLabels<'_>,
) -> Result<DetectionReport> {
    if m_max < 1 {
        return Err(Error::InvalidParameter("m_max must be at least 1".into()));
    }
    let mub = validate_mub(basis_a, basis_b, tol.eps)?;
    if !mub.is_mub {
        return Err(Error::NotMub {
            deviation: mub.deviation,
        });
    }
    let twirled = y_twirl(rho);
    let q = extended_kd(&twirled, basis_a, basis_b)?;
    let ms = moments(&q, 2 * m_max + 1, tol.eps_moment)?;
    let determinants = (1..=m_max)
        .map(|m| {
            let value = hankel(&ms, m).expect("enough moments").det();
            DeterminantEntry {
                order: m,
                value,
                sign: DetSign::classify(value, tol.eps_det),
            }
        })
        .collect::<Vec<_>>();
    let minimal_order = determinants
        .iter()
        .find(|e| e.sign == DetSign::Negative)
        .map(|e| e.order);
    let reference_m_l1 = l1_imaginarity(rho);
    let verdict = match minimal_order {
        Some(_) => Verdict::Detected,
        None if reference_m_l1 > tol.eps
            && determinants
                .iter()
                .any(|e| e.sign == DetSign::WithinToleranceOfZero) =>
        {
            Verdict::Inconclusive
        }
        None => Verdict::NotDetected,
    };
    Ok(DetectionReport {
        verdict,
        minimal_order,
        determinants,
        reference_m_l1,
        moments: ms,
        parameters: ReportParameters {
            dim: rho.dim(),
            basis_a: labels.a.to_string(),
            basis_b: labels.b.to_string(),
            m_max,
            tolerances: *tol,
            seed: None,
        },
    })
}

/// Reports from running [`detect`] against several candidate partner bases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiBasisReport {
    /// `Detected` if any basis detects.
    pub verdict: Verdict,
    pub reports: Vec<DetectionReport>,
}

pub fn detect_over_bases(
    rho: &DensityMatrix,
    basis_a: &OrthonormalBasis,
    candidates: &[OrthonormalBasis],
    m_max: usize,
    tol: &Tolerances,
    exec: Execution,
) -> Result<MultiBasisReport> {
    let reports = map_slice(exec, candidates, |b| detect(rho, basis_a, b, m_max, tol))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let verdict = if reports.iter().any(DetectionReport::detected) {
        Verdict::Detected
    } else if reports.iter().any(|r| r.verdict == Verdict::Inconclusive) {
        Verdict::Inconclusive
    } else {
        Verdict::NotDetected
    };
    Ok(MultiBasisReport { verdict, reports })
}
