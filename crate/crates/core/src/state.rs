//! Validated states, bases and mutually unbiased basis constructions.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, norm, ComplexMatrix, C64, DEFAULT_EPS, ONE, ZERO};

/// Default PSD tolerance on the minimum eigenvalue.
pub const DEFAULT_EPS_PSD: f64 = 1e-9;
/// Default tolerance on discarded imaginary parts of moments.
pub const DEFAULT_EPS_MOMENT: f64 = 1e-9;
/// Default sign threshold on Hankel determinants.
pub const DEFAULT_EPS_DET: f64 = 1e-12;

/// Numerical tolerances shared across the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Hermiticity, trace, normalization, orthonormality and MUB checks.
    pub eps: f64,
    pub eps_psd: f64,
    pub eps_moment: f64,
    pub eps_det: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps: DEFAULT_EPS,
            eps_psd: DEFAULT_EPS_PSD,
            eps_moment: DEFAULT_EPS_MOMENT,
            eps_det: DEFAULT_EPS_DET,
        }
    }
}

/// A Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `<m|rho|n>` in the computational basis.
    pub fn get(&self, m: usize, n: usize) -> C64 {
        self.matrix[(m, n)]
    }

    pub fn purity(&self) -> f64 {
        self.matrix
            .trace_of_product(&self.matrix)
            .expect("square")
            .re
    }

    /// `rho^{⊗n}`. Tensor powers of states are states, so no re-validation runs.
    pub fn tensor_power(&self, n: usize) -> DensityMatrix {
        DensityMatrix {
            matrix: self.matrix.kron_power(n),
        }
    }

    /// `rho ⊗ sigma`.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            matrix: self.matrix.kron(&other.matrix),
        }
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::DimensionTooSmall { dim, min: 1 });
        }
        Ok(Self {
            matrix: ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)),
        })
    }

    /// Wraps a matrix the caller has already proven to be a state. Crate-internal.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_square());
        Self { matrix }
    }
}

/// Validates `entries` as a density matrix.
///
/// Input whose Hermiticity residual is at most `eps` is symmetrized to `(M + M^dag)/2`;
/// anything worse is rejected.
pub fn make_density(entries: ComplexMatrix, tol: &Tolerances) -> Result<DensityMatrix> {
    if !entries.is_square() {
        return Err(Error::NotSquare {
            rows: entries.rows(),
            cols: entries.cols(),
        });
    }
    let residual = entries.hermiticity_residual();
    if residual > tol.eps {
        return Err(Error::NotHermitian { residual });
    }
    let n = entries.rows();
    let sym = ComplexMatrix::from_fn(n, n, |r, c| (entries[(r, c)] + entries[(c, r)].conj()) * 0.5);
    let trace_residual = (sym.trace() - ONE).norm();
    if trace_residual > tol.eps {
        return Err(Error::NotUnitTrace {
            residual: trace_residual,
        });
    }
    let min_eigenvalue = sym.hermitian_eigenvalues()?[0];
    if min_eigenvalue < -tol.eps_psd {
        return Err(Error::NotPsd { min_eigenvalue });
    }
    Ok(DensityMatrix { matrix: sym })
}

/// A unit vector in `C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>, eps: f64) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::DimensionTooSmall { dim: 0, min: 1 });
        }
        let nrm = norm(&amplitudes);
        if (nrm - 1.0).abs() > eps {
            return Err(Error::NotNormalized { norm: nrm });
        }
        Ok(Self { amplitudes })
    }

    /// `cos(theta/2)|0> + sin(theta/2) e^{i alpha}|1>`.
    pub fn qubit(theta: f64, alpha: f64) -> Self {
        Self {
            amplitudes: vec![
                C64::new((theta / 2.0).cos(), 0.0),
                C64::from_polar((theta / 2.0).sin(), alpha),
            ],
        }
    }

    /// Computational basis vector `|index>`.
    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }
}

/// `|psi><psi|`.
pub fn pure_density(psi: &PureState) -> Result<DensityMatrix> {
    let nrm = norm(psi.amplitudes());
    if (nrm - 1.0).abs() > DEFAULT_EPS {
        return Err(Error::NotNormalized { norm: nrm });
    }
    make_density(
        ComplexMatrix::outer(psi.amplitudes(), psi.amplitudes()),
        &Tolerances::default(),
    )
}

/// Ordered orthonormal basis; vector `i` is `|v_i>`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    vectors: Vec<Vec<C64>>,
}

impl OrthonormalBasis {
    /// Validates `<v_i|v_j> = delta_ij` within `eps`.
    pub fn new(vectors: Vec<Vec<C64>>, eps: f64) -> Result<Self> {
        let d = vectors.len();
        if d < 1 {
            return Err(Error::DimensionTooSmall { dim: d, min: 1 });
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: v.len(),
            });
        }
        let mut residual = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { ONE } else { ZERO };
                residual = residual.max((inner(&vectors[i], &vectors[j]) - target).norm());
            }
        }
        if residual > eps {
            return Err(Error::NotOrthonormal { residual });
        }
        Ok(Self { vectors })
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vector(&self, i: usize) -> &[C64] {
        &self.vectors[i]
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    /// Unitary whose columns are the basis vectors.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let d = self.dim();
        ComplexMatrix::from_fn(d, d, |r, c| self.vectors[c][r])
    }

    /// Overlap matrix `O[i][k] = <self_i|other_k>`.
    pub fn overlaps(&self, other: &OrthonormalBasis) -> Result<Vec<Vec<C64>>> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .vectors
            .iter()
            .map(|a| other.vectors.iter().map(|b| inner(a, b)).collect())
            .collect())
    }

    /// `<v_i|M|v_j>` for all `i, j`.
    pub fn matrix_elements(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.rows() != self.dim() || m.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: m.rows(),
            });
        }
        let images: Vec<Vec<C64>> = self
            .vectors
            .iter()
            .map(|v| m.apply(v).expect("checked shape"))
            .collect();
        let d = self.dim();
        Ok(ComplexMatrix::from_fn(d, d, |i, j| inner(&self.vectors[i], &images[j])))
    }
}

pub fn computational_basis(d: usize) -> Result<OrthonormalBasis> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { dim: d, min: 2 });
    }
    Ok(OrthonormalBasis {
        vectors: (0..d)
            .map(|i| (0..d).map(|j| if i == j { ONE } else { ZERO }).collect())
            .collect(),
    })
}

/// Discrete-Fourier partner basis `b_k = d^{-1/2} sum_j omega^{jk} a_j`, `omega = e^{2 pi i/d}`.
pub fn fourier_mub(basis: &OrthonormalBasis) -> OrthonormalBasis {
    let d = basis.dim();
    let scale = 1.0 / (d as f64).sqrt();
    let vectors = (0..d)
        .map(|k| {
            let mut v = vec![ZERO; d];
            for j in 0..d {
                // reduce jk mod d before forming the phase so equal powers are bit-identical
                let phase = C64::from_polar(scale, 2.0 * PI * ((j * k) % d) as f64 / d as f64);
                for (dst, a) in v.iter_mut().zip(basis.vector(j)) {
                    *dst += phase * a;
                }
            }
            v
        })
        .collect();
    OrthonormalBasis { vectors }
}

/// `b_1 = (|0> + e^{i beta}|1>)/sqrt 2`, `b_2 = (|0> - e^{i beta}|1>)/sqrt 2`.
pub fn qubit_beta_basis(beta: f64) -> OrthonormalBasis {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let phase = C64::from_polar(s, beta);
    OrthonormalBasis {
        vectors: vec![vec![C64::new(s, 0.0), phase], vec![C64::new(s, 0.0), -phase]],
    }
}

/// Outcome of a mutual-unbiasedness check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MubCheck {
    pub is_mub: bool,
    /// `max_{i,k} | |<a_i|b_k>| - 1/sqrt d |`.
    pub deviation: f64,
}

pub fn validate_mub(a: &OrthonormalBasis, b: &OrthonormalBasis, eps: f64) -> Result<MubCheck> {
    let target = 1.0 / (a.dim() as f64).sqrt();
    let deviation = a
        .overlaps(b)?
        .iter()
        .flatten()
        .map(|o| (o.norm() - target).abs())
        .fold(0.0, f64::max);
    Ok(MubCheck {
        is_mub: deviation <= eps,
        deviation,
    })
}

fn ginibre(d: usize, rng: &mut ChaCha8Rng, imaginary: bool) -> ComplexMatrix {
    let data = (0..d * d)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = if imaginary { StandardNormal.sample(rng) } else { 0.0 };
            C64::new(re, im)
        })
        .collect();
    ComplexMatrix::new(d, d, data).expect("d*d entries")
}

fn normalized_gram(g: &ComplexMatrix) -> DensityMatrix {
    let gg = g * &g.adjoint();
    let tr = gg.trace().re;
    let n = gg.rows();
    // force exact Hermitian symmetry; the product is Hermitian only up to rounding
    let m = ComplexMatrix::from_fn(n, n, |r, c| {
        if r == c {
            C64::new(gg[(r, r)].re / tr, 0.0)
        } else if r < c {
            gg[(r, c)] / tr
        } else {
            gg[(c, r)].conj() / tr
        }
    });
    DensityMatrix::from_trusted(m)
}

/// Seeded density matrix `G G^dag / Tr(G G^dag)` from a complex Ginibre draw.
pub fn random_density(d: usize, seed: u64) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { dim: d, min: 2 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(normalized_gram(&ginibre(d, &mut rng, true)))
}

/// Seeded real density matrix (real Ginibre draw); every entry has zero imaginary part.
pub fn random_real_density(d: usize, seed: u64) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { dim: d, min: 2 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(normalized_gram(&ginibre(d, &mut rng, false)))
}

/// Seeded Haar-like unitary: Gram-Schmidt on the columns of a complex Ginibre draw.
pub fn random_unitary(d: usize, seed: u64) -> Result<ComplexMatrix> {
    if d < 1 {
        return Err(Error::DimensionTooSmall { dim: d, min: 1 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ginibre(d, &mut rng, true);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    for c in 0..d {
        let mut v = g.column(c);
        // two passes keep the basis orthonormal to rounding
        for _ in 0..2 {
            for u in &cols {
                let proj = inner(u, &v);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= proj * y;
                }
            }
        }
        let n = norm(&v);
        cols.push(v.into_iter().map(|x| x / n).collect());
    }
    Ok(ComplexMatrix::from_fn(d, d, |r, c| cols[c][r]))
}

/// Seeded diagonal density matrix with Dirichlet-like weights.
pub fn random_diagonal_density(d: usize, seed: u64) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { dim: d, min: 2 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..d)
        .map(|_| {
            let x: f64 = StandardNormal.sample(&mut rng);
            x * x
        })
        .collect();
    let total: f64 = w.iter().sum();
    let diag: Vec<C64> = w.iter().map(|x| C64::new(x / total, 0.0)).collect();
    Ok(DensityMatrix::from_trusted(ComplexMatrix::diag(&diag)))
}

/// On-disk density matrix: `{"dim": d, "re": [[..]], "im": [[..]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let rows = |f: fn(&C64) -> f64| {
            (0..m.rows())
                .map(|r| m.row(r).iter().map(f).collect())
                .collect()
        };
        Self {
            dim: m.rows(),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let m = ComplexMatrix::from_re_im(&self.re, &self.im)?;
        if m.rows() != self.dim || m.cols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: if m.rows() != self.dim { m.rows() } else { m.cols() },
            });
        }
        Ok(m)
    }
}

/// Failure while reading a state or matrix file.
#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] Error),
}

/// Parses the JSON state format and validates it with `tol`.
pub fn parse_density_json(text: &str, tol: &Tolerances) -> std::result::Result<DensityMatrix, FileError> {
    let file: MatrixFile = serde_json::from_str(text)?;
    Ok(make_density(file.to_matrix()?, tol)?)
}

pub fn density_to_json(rho: &DensityMatrix) -> String {
    serde_json::to_string_pretty(&MatrixFile::from_matrix(rho.matrix())).expect("plain data")
}
