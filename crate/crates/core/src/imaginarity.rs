//! Real/imaginary decomposition, antisymmetric generators, the Y-twirl channel and the
//! l1 measures of imaginarity and coherence.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, I, ONE};
use crate::state::{DensityMatrix, OrthonormalBasis};

/// `Y_pq = i(|p><q| - |q><p|)` on `C^d`, with `p < q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AntisymmetricGenerator {
    pub dim: usize,
    pub p: usize,
    pub q: usize,
}

impl AntisymmetricGenerator {
    pub fn new(dim: usize, p: usize, q: usize) -> Result<Self> {
        if p >= q || q >= dim {
            return Err(Error::InvalidParameter(format!(
                "generator indices need p < q < d, got p={p}, q={q}, d={dim}"
            )));
        }
        Ok(Self { dim, p, q })
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        m[(self.p, self.q)] = I;
        m[(self.q, self.p)] = -I;
        m
    }

    /// Projector onto `span{|p>, |q>}`; equals `Y_pq^2`.
    pub fn projector(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        m[(self.p, self.p)] = ONE;
        m[(self.q, self.q)] = ONE;
        m
    }

    /// `Tr(Y_pq rho) = 2 Im(rho_pq)`; avoids forming the matrix.
    pub fn expectation(&self, rho: &DensityMatrix) -> f64 {
        2.0 * rho.get(self.p, self.q).im
    }
}

/// All `d(d-1)/2` generators in lexicographic `(p, q)` order.
pub fn antisymmetric_generators(d: usize) -> Result<Vec<AntisymmetricGenerator>> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { dim: d, min: 2 });
    }
    Ok((0..d)
        .flat_map(|p| (p + 1..d).map(move |q| AntisymmetricGenerator { dim: d, p, q }))
        .collect())
}

/// `rho = real_part + imag_part` with `real_part = (rho + rho^T)/2`, `imag_part = (rho - rho^T)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImaginaritySplit {
    pub real_part: ComplexMatrix,
    pub imag_part: ComplexMatrix,
}

pub fn split(rho: &DensityMatrix) -> ImaginaritySplit {
    let m = rho.matrix();
    let d = m.rows();
    ImaginaritySplit {
        real_part: ComplexMatrix::from_fn(d, d, |r, c| (m[(r, c)] + m[(c, r)]) * 0.5),
        imag_part: ComplexMatrix::from_fn(d, d, |r, c| (m[(r, c)] - m[(c, r)]) * 0.5),
    }
}

/// Y-twirl `E(rho) = (rho + sum_{p<q} Y_pq rho Y_pq) / d`, evaluated entrywise:
/// diagonal entries become `1/d` and off-diagonals `(2/d) i Im(rho_mn)`.
pub fn y_twirl(rho: &DensityMatrix) -> DensityMatrix {
    let d = rho.dim();
    let inv = 1.0 / d as f64;
    let m = ComplexMatrix::from_fn(d, d, |r, c| {
        if r == c {
            C64::new(inv, 0.0)
        } else {
            C64::new(0.0, 2.0 * inv * rho.get(r, c).im)
        }
    });
    DensityMatrix::from_trusted(m)
}

/// Y-twirl by explicit Kraus products `(rho + sum_{p<q} Y_pq rho Y_pq) / d`.
pub fn y_twirl_kraus(rho: &DensityMatrix) -> ComplexMatrix {
    let d = rho.dim();
    let mut acc = rho.matrix().clone();
    for g in antisymmetric_generators(d).expect("density matrices have d >= 2") {
        let y = g.matrix();
        acc = &acc + &(&(&y * rho.matrix()) * &y);
    }
    acc.scale(C64::new(1.0 / d as f64, 0.0))
}

/// `M_l1(rho) = sum_{i != j} |Im rho_ij|`.
pub fn l1_imaginarity(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    let mut total = 0.0;
    for r in 0..d {
        for c in 0..d {
            if r != c {
                total += rho.get(r, c).im.abs();
            }
        }
    }
    total
}

/// `C_l1(rho, {a_j}) = sum_{j != k} |<a_j|rho|a_k>|`.
pub fn l1_coherence(rho: &DensityMatrix, basis: &OrthonormalBasis) -> Result<f64> {
    let elems = basis.matrix_elements(rho.matrix())?;
    let d = basis.dim();
    let mut total = 0.0;
    for j in 0..d {
        for k in 0..d {
            if j != k {
                total += elems[(j, k)].norm();
            }
        }
    }
    Ok(total)
}

/// `max |Im rho_ij| <= eps`.
pub fn is_real_state(rho: &DensityMatrix, eps: f64) -> bool {
    rho.matrix().as_slice().iter().all(|z| z.im.abs() <= eps)
}
