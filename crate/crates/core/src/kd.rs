//! Kirkwood-Dirac quasiprobabilities.
//!
//! Two-index `Q_ik = <b_k|a_i><a_i|rho|b_k>` and the three-index extended form
//! `Q*_ijk = <a_j|b_k><b_k|a_i><a_i|rho|a_j>`, stored row-major in `(i, j, k)`.
//! Every entry is a single fixed-order product of precomputed overlaps, so parallel
//! construction is bitwise identical to sequential construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, ComplexMatrix, C64, DEFAULT_EPS, ZERO};
use crate::par::{map_range, Execution};
use crate::state::{make_density, validate_mub, DensityMatrix, OrthonormalBasis, Tolerances};

/// Overlaps below this modulus are treated as zero by [`reconstruct`].
pub const ZERO_OVERLAP: f64 = 1e-12;

fn check_dims(rho: &DensityMatrix, a: &OrthonormalBasis, b: &OrthonormalBasis) -> Result<()> {
    for found in [a.dim(), b.dim()] {
        if found != rho.dim() {
            return Err(Error::DimensionMismatch {
                expected: rho.dim(),
                found,
            });
        }
    }
    Ok(())
}

/// Two-index KD distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct KdTensor {
    dim: usize,
    values: Vec<C64>,
    basis_a: OrthonormalBasis,
    basis_b: OrthonormalBasis,
}

impl KdTensor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, k: usize) -> C64 {
        self.values[i * self.dim + k]
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn basis_a(&self) -> &OrthonormalBasis {
        &self.basis_a
    }

    pub fn basis_b(&self) -> &OrthonormalBasis {
        &self.basis_b
    }

    pub fn total(&self) -> C64 {
        self.values.iter().sum()
    }

    /// Largest deviation of the row/column sums from the Born probabilities of `rho`.
    pub fn marginal_residual(&self, rho: &DensityMatrix) -> Result<f64> {
        let d = self.dim;
        let pa = self.basis_a.matrix_elements(rho.matrix())?;
        let pb = self.basis_b.matrix_elements(rho.matrix())?;
        let mut worst = 0.0f64;
        for i in 0..d {
            let row: C64 = (0..d).map(|k| self.get(i, k)).sum();
            worst = worst.max((row - pa[(i, i)]).norm());
        }
        for k in 0..d {
            let col: C64 = (0..d).map(|i| self.get(i, k)).sum();
            worst = worst.max((col - pb[(k, k)]).norm());
        }
        Ok(worst)
    }
}

pub fn kd(rho: &DensityMatrix, a: &OrthonormalBasis, b: &OrthonormalBasis) -> Result<KdTensor> {
    check_dims(rho, a, b)?;
    let d = rho.dim();
    let overlaps = a.overlaps(b)?;
    let rho_b: Vec<Vec<C64>> = b
        .vectors()
        .iter()
        .map(|v| rho.matrix().apply(v).expect("checked dims"))
        .collect();
    let mut values = Vec::with_capacity(d * d);
    for i in 0..d {
        for k in 0..d {
            values.push(overlaps[i][k].conj() * inner(a.vector(i), &rho_b[k]));
        }
    }
    Ok(KdTensor {
        dim: d,
        values,
        basis_a: a.clone(),
        basis_b: b.clone(),
    })
}

/// Three-index extended KD distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedKdTensor {
    dim: usize,
    values: Vec<C64>,
    basis_a: OrthonormalBasis,
    basis_b: OrthonormalBasis,
    mub_deviation: f64,
}

impl ExtendedKdTensor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> C64 {
        let d = self.dim;
        self.values[(i * d + j) * d + k]
    }

    /// Entries in lexicographic `(i, j, k)` order.
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn basis_a(&self) -> &OrthonormalBasis {
        &self.basis_a
    }

    pub fn basis_b(&self) -> &OrthonormalBasis {
        &self.basis_b
    }

    /// Whether `basis_b` passed the MUB check at [`DEFAULT_EPS`].
    pub fn is_mub(&self) -> bool {
        self.mub_deviation <= DEFAULT_EPS
    }

    pub fn mub_deviation(&self) -> f64 {
        self.mub_deviation
    }

    pub fn total(&self) -> C64 {
        self.values.iter().sum()
    }

    pub fn to_dump(&self) -> TensorDump {
        let d = self.dim;
        let mut entries = Vec::with_capacity(self.values.len());
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let z = self.get(i, j, k);
                    entries.push(TensorEntry {
                        i,
                        j,
                        k,
                        re: z.re,
                        im: z.im,
                    });
                }
            }
        }
        TensorDump { dim: d, entries }
    }
}

/// JSON dump of an extended KD tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorDump {
    pub dim: usize,
    pub entries: Vec<TensorEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub re: f64,
    pub im: f64,
}

pub fn extended_kd(
    rho: &DensityMatrix,
    a: &OrthonormalBasis,
    b: &OrthonormalBasis,
) -> Result<ExtendedKdTensor> {
    extended_kd_with(rho, a, b, Execution::default())
}

pub fn extended_kd_with(
    rho: &DensityMatrix,
    a: &OrthonormalBasis,
    b: &OrthonormalBasis,
    exec: Execution,
) -> Result<ExtendedKdTensor> {
    check_dims(rho, a, b)?;
    let d = rho.dim();
    // overlaps[j][k] = <a_j|b_k>, rho_a[(i, j)] = <a_i|rho|a_j>
    let overlaps = a.overlaps(b)?;
    let rho_a = a.matrix_elements(rho.matrix())?;
    let blocks = map_range(exec, d, |i| {
        let mut block = Vec::with_capacity(d * d);
        for j in 0..d {
            for k in 0..d {
                block.push(overlaps[j][k] * overlaps[i][k].conj() * rho_a[(i, j)]);
            }
        }
        block
    });
    let mub_deviation = validate_mub(a, b, DEFAULT_EPS)?.deviation;
    Ok(ExtendedKdTensor {
        dim: d,
        values: blocks.concat(),
        basis_a: a.clone(),
        basis_b: b.clone(),
        mub_deviation,
    })
}

/// `sum |Q*| - 1`. For mutually unbiased bases this is the l1 coherence in `basis_a`.
pub fn nonpositivity(q: &ExtendedKdTensor) -> f64 {
    q.values.iter().map(|z| z.norm()).sum::<f64>() - 1.0
}

/// Inverts the extended distribution:
/// `rho = sum_{ijk} |a_i><b_k| Q*_ijk / <b_k|a_i>`.
pub fn reconstruct(q: &ExtendedKdTensor) -> Result<DensityMatrix> {
    let d = q.dim;
    let overlaps = q.basis_a.overlaps(&q.basis_b)?;
    for (i, row) in overlaps.iter().enumerate() {
        if let Some(k) = row.iter().position(|o| o.norm() < ZERO_OVERLAP) {
            return Err(Error::ZeroOverlap { i, k });
        }
    }
    let mut m = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        for k in 0..d {
            // <b_k|a_i> = conj(<a_i|b_k>)
            let weight: C64 = (0..d).map(|j| q.get(i, j, k)).sum::<C64>() / overlaps[i][k].conj();
            if weight == ZERO {
                continue;
            }
            let a = q.basis_a.vector(i);
            let b = q.basis_b.vector(k);
            for r in 0..d {
                for c in 0..d {
                    m[(r, c)] += weight * a[r] * b[c].conj();
                }
            }
        }
    }
    make_density(m, &Tolerances::default())
}

/// Extended KD distribution over an ordered list of bases:
/// `Q*_{i1..il} = Tr(Pi^(l)_{il} ... Pi^(1)_{i1} rho)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KdArray {
    dim: usize,
    order: usize,
    values: Vec<C64>,
}

impl KdArray {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Entries with `i1` as the most significant index.
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn get(&self, index: &[usize]) -> C64 {
        assert_eq!(index.len(), self.order);
        let flat = index.iter().fold(0, |acc, &i| acc * self.dim + i);
        self.values[flat]
    }
}

pub fn extended_kd_general(rho: &DensityMatrix, bases: &[OrthonormalBasis]) -> Result<KdArray> {
    if bases.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least two bases, got {}",
            bases.len()
        )));
    }
    let d = rho.dim();
    if let Some(b) = bases.iter().find(|b| b.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: b.dim(),
        });
    }
    let l = bases.len();
    // links[r][x][y] = <v^(r+1)_x | v^(r)_y>
    let links: Vec<Vec<Vec<C64>>> = (0..l - 1)
        .map(|r| bases[r + 1].overlaps(&bases[r]).expect("dims checked"))
        .collect();
    let rho_last: Vec<Vec<C64>> = bases[l - 1]
        .vectors()
        .iter()
        .map(|v| rho.matrix().apply(v).expect("dims checked"))
        .collect();
    let total = d.pow(l as u32);
    let mut values = Vec::with_capacity(total);
    let mut idx = vec![0usize; l];
    for _ in 0..total {
        // <v^(1)|rho|v^(l)> * prod <v^(r+1)|v^(r)>
        let mut z = inner(bases[0].vector(idx[0]), &rho_last[idx[l - 1]]);
        for r in 0..l - 1 {
            z *= links[r][idx[r + 1]][idx[r]];
        }
        values.push(z);
        for pos in (0..l).rev() {
            idx[pos] += 1;
            if idx[pos] < d {
                break;
            }
            idx[pos] = 0;
        }
    }
    Ok(KdArray {
        dim: d,
        order: l,
        values,
    })
}
