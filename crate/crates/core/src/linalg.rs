//! Dense complex matrices.
//!
//! Everything in the crate lives at d <= 16 (and d^n <= a few thousand for the n-copy
//! operators), so a flat row-major `Vec<Complex64>` is all the structure needed.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Default absolute tolerance for matrix comparisons.
pub const DEFAULT_EPS: f64 = 1e-10;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionTooSmall {
                dim: rows.min(cols),
                min: 1,
            });
        }
        if data.len() != rows * cols {
            return Err(Error::EntryCount {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch {
                    expected: ncols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(nrows, ncols, data)
    }

    /// Builds a matrix from separate real and imaginary row arrays.
    pub fn from_re_im(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::DimensionMismatch {
                expected: re.len(),
                found: im.len(),
            });
        }
        let rows = re
            .iter()
            .zip(im)
            .map(|(r, i)| {
                if r.len() != i.len() {
                    return Err(Error::DimensionMismatch {
                        expected: r.len(),
                        found: i.len(),
                    });
                }
                Ok(r.iter().zip(i).map(|(&a, &b)| C64::new(a, b)).collect())
            })
            .collect::<Result<Vec<Vec<C64>>>>()?;
        Self::from_rows(&rows)
    }

    /// Diagonal matrix.
    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |r, c| if r == c { values[r] } else { ZERO })
    }

    /// Outer product `|u><v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().copied().map(f).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> Result<C64> {
        if self.cols != other.rows || self.rows != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut acc = ZERO;
        for r in 0..self.rows {
            let row = self.row(r);
            for (c, &a) in row.iter().enumerate() {
                acc += a * other[(c, r)];
            }
        }
        Ok(acc)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        Self::from_fn(rows, cols, |r, c| {
            self[(r / other.rows, c / other.cols)] * other[(r % other.rows, c % other.cols)]
        })
    }

    /// `self^{⊗n}`; `n = 0` gives the 1x1 identity.
    pub fn kron_power(&self, n: usize) -> Self {
        let mut out = Self::identity(1);
        for _ in 0..n {
            out = out.kron(self);
        }
        out
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn approx_eq(&self, other: &Self, eps: f64) -> bool {
        self.max_abs_diff(other).is_ok_and(|d| d <= eps)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |M_mn - conj(M_nm)|`; infinite for non-square input.
    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// `max |U^dag U - I|`; infinite for non-square input.
    pub fn unitarity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let prod = self
            .adjoint()
            .matmul(self)
            .expect("adjoint of a square matrix conforms");
        prod.max_abs_diff(&Self::identity(self.rows))
            .expect("same shape")
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    ///
    /// Only the Hermitian part `(M + M^dag)/2` is seen by the solver.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let m = nalgebra::DMatrix::<C64>::from_fn(n, n, |r, c| {
            (self[(r, c)] + self[(c, r)].conj()) * 0.5
        });
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in add");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sub");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on non-conforming shapes; use [`ComplexMatrix::matmul`] for a checked product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("shape mismatch in mul")
    }
}

/// `<u|v>`.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `v^{⊗n}` as a flat vector of length `len(v)^n`.
pub fn kron_power_vec(v: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![ONE];
    for _ in 0..n {
        out = out
            .iter()
            .flat_map(|&a| v.iter().map(move |&b| a * b))
            .collect();
    }
    out
}

/// Determinant of a real square matrix (row-major) by LU with partial pivoting.
pub fn real_determinant(n: usize, entries: &[f64]) -> f64 {
    assert_eq!(entries.len(), n * n);
    let mut a = entries.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))
            .expect("non-empty pivot range");
        if a[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for r in col + 1..n {
            let factor = a[r * n + col] / p;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= factor * a[col * n + k];
            }
        }
    }
    det
}
