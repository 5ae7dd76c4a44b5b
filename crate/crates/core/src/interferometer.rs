//! Mach-Zehnder interferometer, the n-copy operator `S_n`, and visibility-based
//! imaginarity estimates.
//!
//! The composite register is `path ⊗ internal` with the path qubit as the leading leg.
//! For input `|0><0| ⊗ rho` the output intensity in path port 0 is
//! `I(theta) = (1 + Re[Tr(U rho) e^{-i theta}]) / 2 = (1 + |Tr(U rho)| cos(chi - theta)) / 2`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaginarity::{antisymmetric_generators, AntisymmetricGenerator};
use crate::kd::kd;
use crate::linalg::{kron_power_vec, ComplexMatrix, C64, DEFAULT_EPS, I, ONE, ZERO};
use crate::par::{map_range, Execution};
use crate::state::{DensityMatrix, OrthonormalBasis};

/// Largest `d^n` for which [`s_n_operator`] builds a dense matrix.
pub const DENSE_LIMIT: usize = 4096;

/// Default number of phase samples for grid visibility.
pub const DEFAULT_GRID: usize = 360;

fn check_unitary(u: &ComplexMatrix) -> Result<()> {
    if !u.is_square() {
        return Err(Error::NotSquare {
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    let residual = u.unitarity_residual();
    if residual > DEFAULT_EPS {
        return Err(Error::NotUnitary { residual });
    }
    Ok(())
}

fn check_pair(rho: &DensityMatrix, u: &ComplexMatrix) -> Result<()> {
    check_unitary(u)?;
    if u.rows() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: u.rows(),
        });
    }
    Ok(())
}

fn block_diag(top: &ComplexMatrix, bottom: &ComplexMatrix) -> ComplexMatrix {
    let n = top.rows();
    ComplexMatrix::from_fn(2 * n, 2 * n, |r, c| match (r < n, c < n) {
        (true, true) => top[(r, c)],
        (false, false) => bottom[(r - n, c - n)],
        _ => ZERO,
    })
}

fn hadamard() -> ComplexMatrix {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    ComplexMatrix::from_rows(&[vec![h, h], vec![h, -h]]).expect("2x2")
}

fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]).expect("2x2")
}

/// The five factors of the interferometer in application order (rightmost first).
pub fn mz_factors(u: &ComplexMatrix, theta: f64) -> Result<[ComplexMatrix; 5]> {
    check_unitary(u)?;
    let n = u.rows();
    let id = ComplexMatrix::identity(n);
    let h = hadamard().kron(&id);
    let phase = block_diag(&id.scale(C64::from_polar(1.0, theta)), &id);
    let controlled = block_diag(&id, u);
    let x = pauli_x().kron(&id);
    Ok([h.clone(), phase, controlled, x, h])
}

/// `U_total = (H⊗I)(X⊗I)(|0><0|⊗I + |1><1|⊗U)(e^{i theta}|0><0|⊗I + |1><1|⊗I)(H⊗I)`.
pub fn mz_total_unitary(u: &ComplexMatrix, theta: f64) -> Result<ComplexMatrix> {
    let factors = mz_factors(u, theta)?;
    let mut total = factors[0].clone();
    for f in &factors[1..] {
        total = f * &total;
    }
    Ok(total)
}

/// Output state from the closed form
/// `(|+><+|⊗U rho U^dag + e^{-i theta}|+><-|⊗U rho + e^{i theta}|-><+|⊗rho U^dag + |-><-|⊗rho) / 2`.
pub fn mz_final_state(rho: &DensityMatrix, u: &ComplexMatrix, theta: f64) -> Result<DensityMatrix> {
    check_pair(rho, u)?;
    let r = rho.matrix();
    let ur = u * r;
    let rud = r * &u.adjoint();
    let urud = &ur * &u.adjoint();
    let h = FRAC_1_SQRT_2;
    let plus = [C64::new(h, 0.0), C64::new(h, 0.0)];
    let minus = [C64::new(h, 0.0), C64::new(-h, 0.0)];
    let pp = ComplexMatrix::outer(&plus, &plus);
    let pm = ComplexMatrix::outer(&plus, &minus);
    let mp = ComplexMatrix::outer(&minus, &plus);
    let mm = ComplexMatrix::outer(&minus, &minus);
    let e = C64::from_polar(1.0, theta);
    let sum = &(&pp.kron(&urud) + &pm.kron(&ur).scale(e.conj())) + &(&mp.kron(&rud).scale(e) + &mm.kron(r));
    Ok(DensityMatrix::from_trusted(sum.scale(C64::new(0.5, 0.0))))
}

/// Output state as `U_total (|0><0| ⊗ rho) U_total^dag`.
pub fn mz_final_state_conjugated(
    rho: &DensityMatrix,
    u: &ComplexMatrix,
    theta: f64,
) -> Result<DensityMatrix> {
    check_pair(rho, u)?;
    let total = mz_total_unitary(u, theta)?;
    let zero = ComplexMatrix::outer(&[ONE, ZERO], &[ONE, ZERO]);
    let input = zero.kron(rho.matrix());
    Ok(DensityMatrix::from_trusted(&(&total * &input) * &total.adjoint()))
}

/// `Tr(U rho)`.
pub fn trace_u_rho(rho: &DensityMatrix, u: &ComplexMatrix) -> Result<C64> {
    check_pair(rho, u)?;
    u.trace_of_product(rho.matrix())
}

/// `(1 + Re[tau e^{-i theta}]) / 2`.
pub fn intensity_from_trace(tau: C64, theta: f64) -> f64 {
    0.5 * (1.0 + (tau * C64::from_polar(1.0, -theta)).re)
}

/// Port-0 intensity `Tr[(|0><0| ⊗ I) rho_f]`.
pub fn intensity(rho: &DensityMatrix, u: &ComplexMatrix, theta: f64) -> Result<f64> {
    Ok(intensity_from_trace(trace_u_rho(rho, u)?, theta))
}

/// Evenly spaced phases `2 pi k / n`, `k = 0..n`.
pub fn phase_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

/// `arg(tau)` in `[0, 2 pi)`.
fn phase_of(tau: C64) -> f64 {
    let chi = tau.arg();
    if chi < 0.0 {
        chi + 2.0 * PI
    } else {
        chi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VisibilityMethod {
    Analytic,
    GridSweep,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityResult {
    /// Grid value when a grid ran, otherwise the analytic value.
    pub value: f64,
    pub method: VisibilityMethod,
    /// `chi` from the analytic route, or the refined grid maximum.
    pub phase_at_max: f64,
    pub analytic: Option<f64>,
    pub grid: Option<f64>,
}

/// Vertex of the parabola through three equally spaced samples, as `(offset in steps, value)`.
fn parabolic_vertex(ym: f64, y0: f64, yp: f64) -> (f64, f64) {
    let curv = ym - 2.0 * y0 + yp;
    if curv.abs() < 1e-300 {
        return (0.0, y0);
    }
    let offset = 0.5 * (ym - yp) / curv;
    (offset, y0 - 0.125 * (ym - yp) * (ym - yp) / curv)
}

/// Visibility of sampled intensities on an evenly spaced periodic grid.
///
/// The extreme samples are refined with a three-point parabola through their
/// neighbours, which removes the leading `O(h^2)` sampling bias of raw max/min.
pub fn grid_visibility(intensities: &[f64]) -> Result<(f64, f64)> {
    let n = intensities.len();
    if n < 3 {
        return Err(Error::InvalidParameter("grid needs at least 3 points".into()));
    }
    let (mut imax, mut imin) = (0, 0);
    for (k, &v) in intensities.iter().enumerate() {
        if v > intensities[imax] {
            imax = k;
        }
        if v < intensities[imin] {
            imin = k;
        }
    }
    let at = |k: usize| intensities[k % n];
    let (off_max, max) = parabolic_vertex(at(imax + n - 1), at(imax), at(imax + 1));
    let (_, min) = parabolic_vertex(at(imin + n - 1), at(imin), at(imin + 1));
    let sum = max + min;
    if sum < 1e-15 {
        return Err(Error::DegenerateContrast { sum });
    }
    let step = 2.0 * PI / n as f64;
    let phase = (imax as f64 + off_max) * step;
    Ok(((max - min) / sum, phase.rem_euclid(2.0 * PI)))
}

pub fn visibility(
    rho: &DensityMatrix,
    u: &ComplexMatrix,
    method: VisibilityMethod,
    grid: usize,
) -> Result<VisibilityResult> {
    let tau = trace_u_rho(rho, u)?;
    let analytic = tau.norm();
    let chi = phase_of(tau);
    let sweep = || -> Result<(f64, f64)> {
        let values: Vec<f64> = phase_grid(grid)
            .into_iter()
            .map(|t| intensity_from_trace(tau, t))
            .collect();
        grid_visibility(&values)
    };
    Ok(match method {
        VisibilityMethod::Analytic => VisibilityResult {
            value: analytic,
            method,
            phase_at_max: chi,
            analytic: Some(analytic),
            grid: None,
        },
        VisibilityMethod::GridSweep => {
            let (v, phase) = sweep()?;
            VisibilityResult {
                value: v,
                method,
                phase_at_max: phase,
                analytic: None,
                grid: Some(v),
            }
        }
        VisibilityMethod::Both => {
            let (v, _) = sweep()?;
            VisibilityResult {
                value: v,
                method,
                phase_at_max: chi,
                analytic: Some(analytic),
                grid: Some(v),
            }
        }
    })
}

/// First-harmonic least-squares fit `I = mean + (amplitude/2) cos(chi - theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    pub mean: f64,
    /// Fitted `|Tr(U rho)|`.
    pub amplitude: f64,
    pub chi: f64,
    pub max_residual: f64,
}

/// Sampled interference pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferometerRun {
    pub internal_dim: usize,
    /// `None` when the run was built from a trace alone, e.g. a factorized `S_n`.
    pub unitary: Option<ComplexMatrix>,
    pub phase_grid: Vec<f64>,
    pub intensities: Vec<f64>,
    /// `Tr(U rho)`.
    pub trace: C64,
}

impl InterferometerRun {
    pub fn new(rho: &DensityMatrix, u: &ComplexMatrix, grid: usize, exec: Execution) -> Result<Self> {
        let tau = trace_u_rho(rho, u)?;
        let mut run = Self::from_trace(rho.dim(), tau, grid, exec)?;
        run.unitary = Some(u.clone());
        Ok(run)
    }

    /// Pattern determined by `Tr(U rho)` alone.
    pub fn from_trace(internal_dim: usize, trace: C64, grid: usize, exec: Execution) -> Result<Self> {
        if grid < 3 {
            return Err(Error::InvalidParameter("grid needs at least 3 points".into()));
        }
        let phase_grid = phase_grid(grid);
        let intensities = map_range(exec, grid, |k| intensity_from_trace(trace, phase_grid[k]));
        Ok(Self {
            internal_dim,
            unitary: None,
            phase_grid,
            intensities,
            trace,
        })
    }

    pub fn abs_trace(&self) -> f64 {
        self.trace.norm()
    }

    pub fn chi(&self) -> f64 {
        phase_of(self.trace)
    }

    pub fn visibility(&self) -> Result<f64> {
        grid_visibility(&self.intensities).map(|(v, _)| v)
    }

    /// Exact on an even grid since the intensity has a single harmonic.
    pub fn fit(&self) -> FringeFit {
        let n = self.intensities.len() as f64;
        let (mut s0, mut sc, mut ss) = (0.0, 0.0, 0.0);
        for (&t, &v) in self.phase_grid.iter().zip(&self.intensities) {
            s0 += v;
            sc += v * t.cos();
            ss += v * t.sin();
        }
        let mean = s0 / n;
        let (a, b) = (2.0 * sc / n, 2.0 * ss / n);
        let max_residual = self
            .phase_grid
            .iter()
            .zip(&self.intensities)
            .map(|(&t, &v)| (v - mean - a * t.cos() - b * t.sin()).abs())
            .fold(0.0, f64::max);
        FringeFit {
            mean,
            amplitude: 2.0 * a.hypot(b),
            chi: b.atan2(a).rem_euclid(2.0 * PI),
            max_residual,
        }
    }

    /// Intensities within `[-eps, 1 + eps]` and fit residual at most `fit_tol`.
    pub fn check(&self, eps: f64, fit_tol: f64) -> bool {
        self.intensities.iter().all(|&v| v >= -eps && v <= 1.0 + eps)
            && self.fit().max_residual <= fit_tol
    }

    /// CSV with a comment header carrying `|Tr(U rho)|` and `chi`.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# abs_trace={:.16e} chi={:.16e}\ntheta,intensity\n",
            self.abs_trace(),
            self.chi()
        );
        for (t, v) in self.phase_grid.iter().zip(&self.intensities) {
            out.push_str(&format!("{t:.16e},{v:.16e}\n"));
        }
        out
    }
}

fn check_size(d: usize, n: usize, limit: usize) -> Result<usize> {
    match (d as u128).checked_pow(n as u32) {
        Some(size) if size <= limit as u128 => Ok(size as usize),
        _ => Err(Error::DenseLimitExceeded {
            dim: d.saturating_pow(n as u32),
            limit,
        }),
    }
}

/// `S_n = sum_{ik} (<b_k|a_i> |b_k><a_i|)^{⊗n}` as a dense `d^n x d^n` matrix.
pub fn s_n_operator(a: &OrthonormalBasis, b: &OrthonormalBasis, n: usize) -> Result<ComplexMatrix> {
    s_n_operator_with_limit(a, b, n, DENSE_LIMIT)
}

pub fn s_n_operator_with_limit(
    a: &OrthonormalBasis,
    b: &OrthonormalBasis,
    n: usize,
    limit: usize,
) -> Result<ComplexMatrix> {
    if n < 1 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let d = a.dim();
    let size = check_size(d, n, limit)?;
    let ab = a.overlaps(b)?;
    let a_pow: Vec<Vec<C64>> = (0..d).map(|i| kron_power_vec(a.vector(i), n)).collect();
    let b_pow: Vec<Vec<C64>> = (0..d).map(|k| kron_power_vec(b.vector(k), n)).collect();
    let mut data = vec![ZERO; size * size];
    // one rank-one update w^n |b_k^{⊗n}><a_i^{⊗n}| per pair
    for (i, av) in a_pow.iter().enumerate() {
        for (k, bv) in b_pow.iter().enumerate() {
            let w = ab[i][k].conj().powu(n as u32);
            for (row, &x) in data.chunks_exact_mut(size).zip(bv) {
                let wx = w * x;
                for (dst, y) in row.iter_mut().zip(av) {
                    *dst += wx * y.conj();
                }
            }
        }
    }
    ComplexMatrix::new(size, size, data)
}

/// `V^(n)` from the multi-copy interferometer on a twirled state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentVisibility {
    pub n: usize,
    /// `Tr[S_n rho'^{⊗n}]` from the factorized contraction.
    pub signed_trace: C64,
    /// `|Tr[S_n rho'^{⊗n}]|`.
    pub visibility: f64,
    /// Dense `Tr[S_n rho'^{⊗n}]` when `d^n` fits under the dense limit.
    pub dense_trace: Option<C64>,
}

impl MomentVisibility {
    /// `|dense - factorized|`, if the dense route ran.
    pub fn route_gap(&self) -> Option<f64> {
        self.dense_trace.map(|t| (t - self.signed_trace).norm())
    }
}

/// Factorized `Tr[S_n rho^{⊗n}] = sum_{ik} (<b_k|a_i><a_i|rho|b_k>)^n`.
pub fn factorized_trace(rho: &DensityMatrix, a: &OrthonormalBasis, b: &OrthonormalBasis, n: usize) -> Result<C64> {
    let q = kd(rho, a, b)?;
    Ok(q.values().iter().map(|z| z.powu(n as u32)).sum())
}

/// Dense `Tr[S_n rho^{⊗n}]`, contracting against `rho^{⊗n}` entry by entry.
pub fn dense_trace(
    rho: &DensityMatrix,
    a: &OrthonormalBasis,
    b: &OrthonormalBasis,
    n: usize,
    limit: usize,
) -> Result<C64> {
    let s = s_n_operator_with_limit(a, b, n, limit)?;
    let d = rho.dim();
    let size = s.rows();
    let tensor_entry = |r: usize, c: usize| {
        let (mut r, mut c, mut acc) = (r, c, ONE);
        for _ in 0..n {
            acc *= rho.get(r % d, c % d);
            r /= d;
            c /= d;
        }
        acc
    };
    let mut acc = ZERO;
    for r in 0..size {
        for (c, &v) in s.row(r).iter().enumerate() {
            if v != ZERO {
                acc += v * tensor_entry(c, r);
            }
        }
    }
    Ok(acc)
}

/// `V^(n)` via the factorized contraction, cross-checked densely up to [`DENSE_LIMIT`].
///
/// The input is taken to be a twirl output and is not re-verified.
pub fn moment_via_visibility(
    rho_twirled: &DensityMatrix,
    a: &OrthonormalBasis,
    b: &OrthonormalBasis,
    n: usize,
) -> Result<MomentVisibility> {
    moment_via_visibility_with(rho_twirled, a, b, n, DENSE_LIMIT)
}

pub fn moment_via_visibility_with(
    rho_twirled: &DensityMatrix,
    a: &OrthonormalBasis,
    b: &OrthonormalBasis,
    n: usize,
    dense_limit: usize,
) -> Result<MomentVisibility> {
    if n < 1 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let signed_trace = factorized_trace(rho_twirled, a, b, n)?;
    let dense = if check_size(a.dim(), n, dense_limit).is_ok() {
        Some(dense_trace(rho_twirled, a, b, n, dense_limit)?)
    } else {
        None
    };
    Ok(MomentVisibility {
        n,
        signed_trace,
        visibility: signed_trace.norm(),
        dense_trace: dense,
    })
}

/// `exp(i theta Y_pq) = cos(theta) P_pq + i sin(theta) Y_pq + (I - P_pq)`.
pub fn generator_unitary(g: &AntisymmetricGenerator, theta: f64) -> ComplexMatrix {
    let p = g.projector();
    let y = g.matrix();
    let id = ComplexMatrix::identity(g.dim);
    let block = &p.scale(C64::new(theta.cos(), 0.0)) + &y.scale(I * theta.sin());
    &block + &(&id - &p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorVisibility {
    pub p: usize,
    pub q: usize,
    /// `Tr(U_pq rho)` at `theta = pi/2`.
    pub trace: C64,
    /// Fringe visibility `|Tr(U_pq rho)|`.
    pub visibility: f64,
    /// `|Im Tr(U_pq rho)| = 2 |Im rho_pq|`; the complement block only feeds the real part.
    pub quadrature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityImaginarity {
    /// Sum of fringe visibilities.
    pub total: f64,
    /// Sum of imaginary quadratures; equals `M_l1` in every dimension.
    pub total_quadrature: f64,
    /// One entry per generator, lexicographic in `(p, q)`.
    pub breakdown: Vec<GeneratorVisibility>,
}

/// Per-generator interferometer runs at `theta = pi/2`.
///
/// For `d = 2` the fringe visibility is exactly `2 |Im rho_01|`. For `d > 2` the unitary
/// acts as identity on the complement of `{p, q}` and adds the real population
/// `1 - rho_pp - rho_qq` to the trace, so only the quadrature sum reproduces `M_l1`.
pub fn total_visibility_imaginarity(rho: &DensityMatrix) -> Result<VisibilityImaginarity> {
    let breakdown = antisymmetric_generators(rho.dim())?
        .iter()
        .map(|g| {
            let tau = trace_u_rho(rho, &generator_unitary(g, FRAC_PI_2))?;
            Ok(GeneratorVisibility {
                p: g.p,
                q: g.q,
                trace: tau,
                visibility: tau.norm(),
                quadrature: tau.im.abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VisibilityImaginarity {
        total: breakdown.iter().map(|v| v.visibility).sum(),
        total_quadrature: breakdown.iter().map(|v| v.quadrature).sum(),
        breakdown,
    })
}

/// Exact-expectation resource counts for the two detection strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopyComplexity {
    /// One interferometer circuit per antisymmetric generator, `d(d-1)/2`.
    pub direct_circuits: usize,
    /// Moment orders `r_2..r_{2 m_max + 1}` to evaluate (`r_1 = 1` is free).
    pub moment_orders: usize,
}

pub fn copy_complexity(d: usize, m_max: usize) -> CopyComplexity {
    CopyComplexity {
        direct_circuits: d * d.saturating_sub(1) / 2,
        moment_orders: 2 * m_max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaginarity::{l1_imaginarity, y_twirl};
    use crate::kd::extended_kd;
    use crate::moments::moments;
    use crate::state::{
        computational_basis, fourier_mub, pure_density, qubit_beta_basis, random_density,
        random_unitary, PureState,
    };

    fn series_exp(m: &ComplexMatrix, terms: usize) -> ComplexMatrix {
        let mut out = ComplexMatrix::identity(m.rows());
        let mut term = ComplexMatrix::identity(m.rows());
        for k in 1..terms {
            term = (&term * m).scale(C64::new(1.0 / k as f64, 0.0));
            out = &out + &term;
        }
        out
    }

    #[test]
    fn trivial_interferometer_is_constructive() {
        for d in [1, 2, 3] {
            let id = ComplexMatrix::identity(d);
            let total = mz_total_unitary(&id, 0.0).unwrap();
            assert!(total.unitarity_residual() < 1e-12);
            // |0>⊗psi -> global phase times |0>⊗psi: the top-left block is the identity
            for r in 0..d {
                for c in 0..d {
                    let want = if r == c { ONE } else { ZERO };
                    assert!((total[(r, c)] - want).norm() < 1e-15);
                    assert!(total[(r + d, c)].norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn qubit_total_matches_explicit_product() {
        let g = AntisymmetricGenerator::new(2, 0, 1).unwrap();
        let u = g.matrix().scale(I);
        let total = mz_total_unitary(&u, 0.0).unwrap();
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let hh = ComplexMatrix::from_rows(&[
            vec![h, ZERO, h, ZERO],
            vec![ZERO, h, ZERO, h],
            vec![h, ZERO, -h, ZERO],
            vec![ZERO, h, ZERO, -h],
        ])
        .unwrap();
        let x = ComplexMatrix::from_rows(&[
            vec![ZERO, ZERO, ONE, ZERO],
            vec![ZERO, ZERO, ZERO, ONE],
            vec![ONE, ZERO, ZERO, ZERO],
            vec![ZERO, ONE, ZERO, ZERO],
        ])
        .unwrap();
        // i Y_01 = [[0, -1], [1, 0]]
        let cu = ComplexMatrix::from_rows(&[
            vec![ONE, ZERO, ZERO, ZERO],
            vec![ZERO, ONE, ZERO, ZERO],
            vec![ZERO, ZERO, ZERO, -ONE],
            vec![ZERO, ZERO, ONE, ZERO],
        ])
        .unwrap();
        let want = &(&(&hh * &x) * &cu) * &hh;
        assert!(total.max_abs_diff(&want).unwrap() < 1e-15);
    }

    #[test]
    fn non_unitary_is_rejected() {
        let m = ComplexMatrix::diag(&[ONE, C64::new(2.0, 0.0)]);
        assert!(matches!(mz_total_unitary(&m, 0.0), Err(Error::NotUnitary { .. })));
        let rho = random_density(3, 1).unwrap();
        assert!(matches!(
            mz_final_state(&rho, &ComplexMatrix::identity(2), 0.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn final_state_routes_agree() {
        for d in 2..=4 {
            for seed in 0..5 {
                let rho = random_density(d, seed).unwrap();
                let u = random_unitary(d, 100 + seed).unwrap();
                let theta = 0.37 * seed as f64 + 0.1;
                let a = mz_final_state(&rho, &u, theta).unwrap();
                let b = mz_final_state_conjugated(&rho, &u, theta).unwrap();
                assert!(a.matrix().max_abs_diff(b.matrix()).unwrap() < 1e-12);
                let port0: f64 = (0..d).map(|i| a.get(i, i).re).sum();
                assert!((port0 - intensity(&rho, &u, theta).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn intensity_extremes() {
        let rho = random_density(2, 3).unwrap();
        let id = ComplexMatrix::identity(2);
        assert!((intensity(&rho, &id, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(intensity(&rho, &id, PI).unwrap().abs() < 1e-15);
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        let z = ComplexMatrix::diag(&[ONE, -ONE]);
        for t in phase_grid(12) {
            assert!((intensity(&mixed, &z, t).unwrap() - 0.5).abs() < 1e-15);
        }
        assert!(matches!(
            visibility(&mixed, &z, VisibilityMethod::GridSweep, 360),
            Ok(VisibilityResult { value, .. }) if value.abs() < 1e-15
        ));
    }

    #[test]
    fn grid_matches_analytic() {
        for seed in 0..20 {
            let d = 2 + (seed as usize % 3);
            let rho = random_density(d, seed).unwrap();
            let u = random_unitary(d, seed + 7).unwrap();
            let v = visibility(&rho, &u, VisibilityMethod::Both, 360).unwrap();
            assert!((v.grid.unwrap() - v.analytic.unwrap()).abs() < 1e-6);
            let run = InterferometerRun::new(&rho, &u, 360, Execution::default()).unwrap();
            assert!(run.check(DEFAULT_EPS, 1e-9));
            let fit = run.fit();
            assert!((fit.amplitude - run.abs_trace()).abs() < 1e-12);
            assert!((fit.mean - 0.5).abs() < 1e-12);
        }
        let id = ComplexMatrix::identity(3);
        let rho = random_density(3, 2).unwrap();
        assert!((visibility(&rho, &id, VisibilityMethod::Analytic, 0).unwrap().value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn qubit_generator_visibility_is_twice_imaginary_part() {
        let rho = random_density(2, 11).unwrap();
        let g = AntisymmetricGenerator::new(2, 0, 1).unwrap();
        let v = visibility(&rho, &g.matrix().scale(I), VisibilityMethod::Analytic, 0).unwrap();
        assert!((v.value - 2.0 * rho.get(0, 1).im.abs()).abs() < 1e-15);
    }

    #[test]
    fn s_n_structure() {
        let a = computational_basis(2).unwrap();
        assert!(s_n_operator(&a, &a, 1).unwrap().approx_eq(&ComplexMatrix::identity(2), 1e-15));
        for d in [2, 3] {
            let a = computational_basis(d).unwrap();
            let b = fourier_mub(&a);
            assert!(s_n_operator(&a, &b, 1).unwrap().unitarity_residual() < 1e-12);
            // d rank-one terms on a d^n space: S_n^dag S_n is the diagonal projector scaled by d^{1-n}
            for n in 2..=3 {
                let s = s_n_operator(&a, &b, n).unwrap();
                let ss = &s.adjoint() * &s;
                assert!((s.unitarity_residual() - 1.0).abs() < 1e-12);
                let diag = (0..d).map(|i| i * (d.pow(n as u32) - 1) / (d - 1)).collect::<Vec<_>>();
                for r in 0..ss.rows() {
                    let want = if diag.contains(&r) { (d as f64).powi(1 - n as i32) } else { 0.0 };
                    assert!((ss[(r, r)].re - want).abs() < 1e-12);
                }
            }
        }
        let b = qubit_beta_basis(0.7);
        assert!(matches!(
            s_n_operator(&a, &b, 13),
            Err(Error::DenseLimitExceeded { limit: 4096, .. })
        ));
    }

    #[test]
    fn s_n_trace_is_two_index_kd_power_sum() {
        let rho = y_twirl(&pure_density(&PureState::qubit(FRAC_PI_2, 1.1)).unwrap());
        let a = computational_basis(2).unwrap();
        let b = qubit_beta_basis(0.4);
        let ms = moments(&extended_kd(&rho, &a, &b).unwrap(), 7, 1e-9).unwrap();
        let x = 1.1f64.sin().powi(2);
        for n in 1..=7 {
            let mv = moment_via_visibility(&rho, &a, &b, n).unwrap();
            assert!(mv.route_gap().unwrap() < 1e-13);
            if n <= 2 {
                assert!((mv.signed_trace.re - ms.r(n).unwrap()).abs() < 1e-13);
            }
        }
        // n = 3 carries a beta-dependent term that r_3 = 1/16 does not
        let mv = moment_via_visibility(&rho, &a, &b, 3).unwrap();
        let want = 1.0 / 16.0 - 3.0 * x * (0.8f64).cos() / 16.0;
        assert!((mv.signed_trace.re - want).abs() < 1e-14);
        assert!(mv.signed_trace.im.abs() < 1e-15);
    }

    #[test]
    fn factorized_route_runs_past_dense_limit() {
        let a = computational_basis(3).unwrap();
        let b = fourier_mub(&a);
        let rho = y_twirl(&random_density(3, 4).unwrap());
        let mv = moment_via_visibility(&rho, &a, &b, 9).unwrap();
        assert!(mv.dense_trace.is_none());
        let small = moment_via_visibility_with(&rho, &a, &b, 3, 8).unwrap();
        assert!(small.dense_trace.is_none());
    }

    #[test]
    fn generator_unitary_closed_form() {
        let g = AntisymmetricGenerator::new(3, 0, 2).unwrap();
        assert!(generator_unitary(&g, 0.0).approx_eq(&ComplexMatrix::identity(3), 1e-15));
        let u = generator_unitary(&g, FRAC_PI_2);
        let want = &g.matrix().scale(I) + &(&ComplexMatrix::identity(3) - &g.projector());
        assert!(u.approx_eq(&want, 1e-15));
        for theta in [0.3, 1.7, -2.2] {
            let series = series_exp(&g.matrix().scale(I * theta), 30);
            let u = generator_unitary(&g, theta);
            assert!(u.max_abs_diff(&series).unwrap() < 1e-10);
            assert!(u.unitarity_residual() < 1e-14);
        }
    }

    #[test]
    fn quadrature_sum_is_l1_imaginarity() {
        for d in 2..=5 {
            for seed in 0..10 {
                let rho = random_density(d, seed).unwrap();
                let v = total_visibility_imaginarity(&rho).unwrap();
                assert!((v.total_quadrature - l1_imaginarity(&rho)).abs() < 1e-12);
                assert_eq!(v.breakdown.len(), d * (d - 1) / 2);
                if d == 2 {
                    assert!((v.total - v.total_quadrature).abs() < 1e-15);
                } else {
                    assert!(v.total >= v.total_quadrature - 1e-15);
                }
            }
        }
        let psi = pure_density(&PureState::qubit(FRAC_PI_2, 0.9)).unwrap();
        let v = total_visibility_imaginarity(&psi).unwrap();
        assert!((v.total - 0.9f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn copy_counts() {
        assert_eq!(copy_complexity(3, 3), CopyComplexity { direct_circuits: 3, moment_orders: 6 });
        assert_eq!(copy_complexity(10, 2).direct_circuits, 45);
    }
}
