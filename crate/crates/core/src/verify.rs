//! Built-in self-checks run by `imkit verify`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::detect::detect;
use crate::error::Result;
use crate::imaginarity::{l1_coherence, l1_imaginarity, y_twirl, y_twirl_kraus};
use crate::interferometer::{
    mz_final_state, mz_final_state_conjugated, moment_via_visibility_with, s_n_operator,
    total_visibility_imaginarity, visibility, VisibilityMethod,
};
use crate::kd::{extended_kd, kd, nonpositivity, reconstruct};
use crate::linalg::ComplexMatrix;
use crate::moments::{hankel, moments, moments_from_values, vandermonde_hankel};
use crate::qubit_family::{closed_form_dets, closed_form_moments, twirled_family_state};
use crate::state::{
    computational_basis, fourier_mub, qubit_beta_basis, random_density, random_diagonal_density,
    random_real_density, random_unitary, DensityMatrix, Tolerances,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Fast,
    Full,
}

impl Level {
    fn grid(self) -> (usize, usize) {
        match self {
            Level::Fast => (10, 8),
            Level::Full => (50, 20),
        }
    }

    fn samples(self) -> u64 {
        match self {
            Level::Fast => 20,
            Level::Full => 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed deviation (or violation count for counting checks).
    pub residual: f64,
    pub tolerance: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub level: Level,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn timed(name: &str, tolerance: f64, f: impl FnOnce() -> Result<f64>) -> CheckResult {
    let start = Instant::now();
    let outcome = f();
    let seconds = start.elapsed().as_secs_f64();
    let (passed, residual) = match outcome {
        Ok(r) => (r <= tolerance, r),
        Err(_) => (false, f64::INFINITY),
    };
    CheckResult {
        name: name.to_string(),
        passed,
        residual,
        tolerance,
        seconds,
    }
}

fn alpha_beta_grid(level: Level) -> Vec<(f64, f64)> {
    let (na, nb) = level.grid();
    (0..na)
        .flat_map(|i| {
            (0..nb).map(move |j| (2.0 * PI * i as f64 / na as f64, 2.0 * PI * j as f64 / nb as f64))
        })
        .collect()
}

fn random_states(level: Level, dims: std::ops::RangeInclusive<usize>) -> Result<Vec<DensityMatrix>> {
    let mut out = Vec::new();
    for d in dims {
        for seed in 0..level.samples() {
            out.push(random_density(d, 1000 * d as u64 + seed)?);
        }
    }
    Ok(out)
}

fn fold_max(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    values.into_iter().try_fold(0.0f64, |acc, v| Ok(acc.max(v?)))
}

pub fn run(level: Level) -> VerifyReport {
    let tol = Tolerances::default();
    let mut checks = Vec::new();

    checks.push(timed("moment closed forms", 1e-12, || {
        let a = computational_basis(2)?;
        fold_max(alpha_beta_grid(level).into_iter().map(|(alpha, beta)| {
            let q = extended_kd(&twirled_family_state(alpha), &a, &qubit_beta_basis(beta))?;
            let ms = moments(&q, 7, tol.eps_moment)?;
            let want = closed_form_moments(alpha, beta);
            Ok(ms.values().iter().zip(want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max))
        }))
    }));

    checks.push(timed("hankel determinant closed forms", 1e-14, || {
        let a = computational_basis(2)?;
        fold_max(alpha_beta_grid(level).into_iter().map(|(alpha, beta)| {
            let q = extended_kd(&twirled_family_state(alpha), &a, &qubit_beta_basis(beta))?;
            let ms = moments(&q, 7, tol.eps_moment)?;
            let want = closed_form_dets(alpha, beta);
            let mut worst = 0.0f64;
            for (m, w) in (1..=3).zip(want) {
                worst = worst.max((hankel(&ms, m)?.det() - w).abs());
            }
            Ok(worst)
        }))
    }));

    checks.push(timed("twirl law and kraus route", 1e-12, || {
        fold_max(random_states(level, 2..=6)?.iter().map(|rho| {
            let t = y_twirl(rho);
            let d = rho.dim();
            let mut worst = t.matrix().max_abs_diff(&y_twirl_kraus(rho))?;
            for m in 0..d {
                for n in 0..d {
                    let want = if m == n {
                        crate::linalg::C64::new(1.0 / d as f64, 0.0)
                    } else {
                        crate::linalg::C64::new(0.0, 2.0 / d as f64 * rho.get(m, n).im)
                    };
                    worst = worst.max((t.get(m, n) - want).norm());
                }
            }
            Ok(worst)
        }))
    }));

    checks.push(timed("nonpositivity equals l1 coherence", 1e-11, || {
        fold_max(random_states(level, 2..=6)?.iter().map(|rho| {
            let a = computational_basis(rho.dim())?;
            let q = extended_kd(rho, &a, &fourier_mub(&a))?;
            Ok((nonpositivity(&q) - l1_coherence(rho, &a)?).abs())
        }))
    }));

    checks.push(timed("reconstruction round trip", 1e-10, || {
        fold_max(random_states(level, 2..=5)?.iter().map(|rho| {
            let a = computational_basis(rho.dim())?;
            let q = extended_kd(rho, &a, &fourier_mub(&a))?;
            reconstruct(&q)?.matrix().max_abs_diff(rho.matrix())
        }))
    }));

    checks.push(timed("positive distributions give nonnegative determinants", 1e-13, || {
        let mut worst = 0.0f64;
        for seed in 0..level.samples().max(100) {
            let d = 2 + (seed as usize % 4);
            let rho = random_diagonal_density(d, seed)?;
            let a = computational_basis(d)?;
            let q = extended_kd(&rho, &a, &a)?;
            let ms = moments(&q, 7, tol.eps_moment)?;
            for m in 1..=3 {
                worst = worst.max(-hankel(&ms, m)?.det());
            }
            let lambda: Vec<f64> = q.values().iter().map(|z| z.re).collect();
            let values: Vec<_> = lambda.iter().map(|&l| crate::linalg::C64::new(l, 0.0)).collect();
            let direct = moments_from_values(&values, 7, tol.eps_moment, "positive")?;
            for m in 0..=3 {
                let h = hankel(&direct, m)?;
                for (x, y) in h.entries().iter().zip(vandermonde_hankel(&lambda, m)) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
        Ok(worst.max(0.0))
    }));

    checks.push(timed("visibility quadratures equal l1 imaginarity", 1e-11, || {
        fold_max(random_states(level, 2..=5)?.iter().map(|rho| {
            let v = total_visibility_imaginarity(rho)?;
            Ok((v.total_quadrature - l1_imaginarity(rho)).abs())
        }))
    }));

    checks.push(timed("multi-copy trace equals two-index KD power sum", 1e-11, || {
        let mut worst = 0.0f64;
        for d in [2, 3] {
            let a = computational_basis(d)?;
            let b = fourier_mub(&a);
            worst = worst.max(s_n_operator(&a, &b, 1)?.unitarity_residual());
            for seed in 0..5 {
                let rho = y_twirl(&random_density(d, seed)?);
                let q = kd(&rho, &a, &b)?;
                for n in 2..=7 {
                    // dense cross-check kept to d^n <= 729 so the fast level stays quick
                    let mv = moment_via_visibility_with(&rho, &a, &b, n, 729)?;
                    let want: crate::linalg::C64 = q.values().iter().map(|z| z.powu(n as u32)).sum();
                    worst = worst.max((mv.signed_trace - want).norm());
                    if let Some(gap) = mv.route_gap() {
                        worst = worst.max(gap);
                    }
                }
            }
        }
        Ok(worst)
    }));

    checks.push(timed("interferometer closed form matches conjugation", 1e-12, || {
        fold_max(random_states(level, 2..=4)?.iter().enumerate().map(|(idx, rho)| {
            let u = random_unitary(rho.dim(), 5000 + idx as u64)?;
            let theta = 0.1 + idx as f64 * 0.37;
            let closed = mz_final_state(rho, &u, theta)?;
            let conj = mz_final_state_conjugated(rho, &u, theta)?;
            closed.matrix().max_abs_diff(conj.matrix())
        }))
    }));

    checks.push(timed("grid visibility matches trace modulus", 1e-6, || {
        fold_max(random_states(level, 2..=4)?.iter().enumerate().map(|(idx, rho)| {
            let u = random_unitary(rho.dim(), 7000 + idx as u64)?;
            let v = visibility(rho, &u, VisibilityMethod::Both, 360)?;
            Ok((v.grid.unwrap_or(f64::NAN) - v.analytic.unwrap_or(f64::NAN)).abs())
        }))
    }));

    checks.push(timed("real states are never detected", 0.0, || {
        let mut hits = 0usize;
        for d in [2, 3] {
            let a = computational_basis(d)?;
            let b = fourier_mub(&a);
            for seed in 0..(level.samples() + 50) {
                if detect(&random_real_density(d, seed)?, &a, &b, 3, &tol)?.detected() {
                    hits += 1;
                }
            }
        }
        Ok(hits as f64)
    }));

    checks.push(timed("qubit family detection orders", 0.0, || {
        let a = computational_basis(2)?;
        let mut misses = 0usize;
        for (beta, order) in [(FRAC_PI_2, 1), (0.0, 2), (PI / 4.0, 2)] {
            for k in 1..20 {
                let alpha = PI * k as f64 / 20.0;
                let rho = crate::qubit_family::family_state(alpha);
                let r = detect(&rho, &a, &qubit_beta_basis(beta), 3, &tol)?;
                if r.minimal_order != Some(order) {
                    misses += 1;
                }
            }
        }
        let id = ComplexMatrix::identity(2);
        let rho = crate::qubit_family::family_state(1.0);
        if (visibility(&rho, &id, VisibilityMethod::Analytic, 0)?.value - 1.0).abs() > 1e-14 {
            misses += 1;
        }
        Ok(misses as f64)
    }));

    VerifyReport { level, checks }
}
