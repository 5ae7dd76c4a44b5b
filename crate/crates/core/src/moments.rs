//! Moments of quasiprobability distributions and their Hankel matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kd::ExtendedKdTensor;
use crate::linalg::{real_determinant, C64, ZERO};

/// Real moment sequence `r_1..r_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSequence {
    values: Vec<f64>,
    /// Largest `|Im r_n|` that was discarded.
    pub max_imag_residual: f64,
    pub source: String,
}

impl MomentSequence {
    /// Builds a sequence from already-real values, e.g. published closed forms.
    pub fn from_real(values: Vec<f64>, source: impl Into<String>) -> Self {
        Self {
            values,
            max_imag_residual: 0.0,
            source: source.into(),
        }
    }

    /// `r_n`, 1-based.
    pub fn r(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.values.get(i)).copied()
    }

    /// `[r_1, r_2, ..]`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Complex power sums `sum_x x^n` for `n = 1..=n_max`.
pub fn complex_power_sums(values: &[C64], n_max: usize) -> Vec<C64> {
    let mut sums = vec![ZERO; n_max];
    for &z in values {
        let mut p = z;
        for s in sums.iter_mut() {
            *s += p;
            p *= z;
        }
    }
    sums
}

/// Demotes complex power sums to reals, failing on any `|Im| > eps_moment`.
pub fn moments_from_values(
    values: &[C64],
    n_max: usize,
    eps_moment: f64,
    source: impl Into<String>,
) -> Result<MomentSequence> {
    if n_max < 1 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let sums = complex_power_sums(values, n_max);
    let mut max_imag_residual = 0.0f64;
    for (idx, s) in sums.iter().enumerate() {
        if s.im.abs() > eps_moment {
            return Err(Error::NonRealMoment {
                n: idx + 1,
                residual: s.im.abs(),
            });
        }
        max_imag_residual = max_imag_residual.max(s.im.abs());
    }
    Ok(MomentSequence {
        values: sums.iter().map(|s| s.re).collect(),
        max_imag_residual,
        source: source.into(),
    })
}

/// `r_n = sum_{ijk} (Q*_ijk)^n` for `n = 1..=n_max`.
pub fn moments(q: &ExtendedKdTensor, n_max: usize, eps_moment: f64) -> Result<MomentSequence> {
    moments_from_values(
        q.values(),
        n_max,
        eps_moment,
        format!("extended KD tensor, d={}", q.dim()),
    )
}

/// `(m+1) x (m+1)` Hankel matrix `[H]_pq = r_{p+q+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HankelMatrix {
    order: usize,
    entries: Vec<f64>,
}

impl HankelMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn size(&self) -> usize {
        self.order + 1
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.entries[p * self.size() + q]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Closed form for orders 0 and 1, LU with partial pivoting otherwise.
    pub fn det(&self) -> f64 {
        match self.order {
            0 => self.entries[0],
            1 => self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0),
            _ => real_determinant(self.size(), &self.entries),
        }
    }
}

pub fn hankel(ms: &MomentSequence, m: usize) -> Result<HankelMatrix> {
    let needed = 2 * m + 1;
    if ms.len() < needed {
        return Err(Error::InsufficientMoments {
            order: m,
            needed,
            available: ms.len(),
        });
    }
    let n = m + 1;
    let entries = (0..n * n).map(|x| ms.values[x / n + x % n]).collect();
    Ok(HankelMatrix { order: m, entries })
}

pub fn hankel_det(h: &HankelMatrix) -> f64 {
    h.det()
}

/// `V D V^T` with `V_{p,l} = lambda_l^p` and `D = diag(lambda)`, the Hankel matrix of
/// order `m` that the moments of `lambda` would produce.
pub fn vandermonde_hankel(lambda: &[f64], m: usize) -> Vec<f64> {
    let n = m + 1;
    let powers: Vec<Vec<f64>> = (0..n)
        .map(|p| lambda.iter().map(|l| l.powi(p as i32)).collect())
        .collect();
    let mut out = vec![0.0; n * n];
    for p in 0..n {
        for q in 0..n {
            out[p * n + q] = lambda
                .iter()
                .enumerate()
                .map(|(l, w)| powers[p][l] * w * powers[q][l])
                .sum();
        }
    }
    out
}
