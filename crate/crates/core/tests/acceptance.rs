//! Acceptance criteria, one test per criterion. Each test prints a single
//! `criterion NN PASS|FAIL ...` line with the measured quantities before asserting.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::time::Instant;

use imkit::detect::detect;
use imkit::imaginarity::{l1_coherence, l1_imaginarity, y_twirl, y_twirl_kraus};
use imkit::interferometer::{
    moment_via_visibility, mz_final_state, mz_final_state_conjugated, s_n_operator,
    total_visibility_imaginarity, visibility, VisibilityMethod,
};
use imkit::kd::{extended_kd, nonpositivity, reconstruct};
use imkit::moments::{hankel, moments, moments_from_values, vandermonde_hankel};
use imkit::qubit_family::twirled_family_state;
use imkit::state::{
    computational_basis, fourier_mub, make_density, qubit_beta_basis, random_density,
    random_diagonal_density, random_real_density, random_unitary,
};
use imkit::sweep::{run_sweep, AlphaGrid, SweepConfig};
use imkit::{ComplexMatrix, Execution, Tolerances, C64};

fn sci(values: &[f64]) -> String {
    format!("[{}]", values.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(","))
}

fn verdict(id: u32, pass: bool, detail: String) {
    println!("criterion {id:02} {} {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id:02}: {detail}");
}

/// Reference closed forms for `r_1..r_7` of the twirled qubit family, `X = sin^2 alpha`.
fn reference_moments(alpha: f64, beta: f64) -> [f64; 7] {
    let x = alpha.sin().powi(2);
    [
        1.0,
        0.25 - 0.25 * x * (2.0 * beta).cos(),
        1.0 / 16.0,
        1.0 / 64.0 + x * x * (4.0 * beta).cos() / 64.0,
        1.0 / 256.0,
        1.0 / 1024.0 + x.powi(3) * (6.0 * beta).cos() / 1024.0,
        1.0 / 4096.0,
    ]
}

fn family_moments(alpha: f64, beta: f64) -> imkit::moments::MomentSequence {
    let a = computational_basis(2).unwrap();
    let q = extended_kd(&twirled_family_state(alpha), &a, &qubit_beta_basis(beta)).unwrap();
    moments(&q, 7, 1e-9).unwrap()
}

fn family_det(alpha: f64, beta: f64, m: usize) -> f64 {
    hankel(&family_moments(alpha, beta), m).unwrap().det()
}

#[test]
fn criterion_01_moment_closed_forms_on_grid() {
    let start = Instant::now();
    let mut worst = [0.0f64; 7];
    for i in 0..50 {
        for j in 0..20 {
            let alpha = 2.0 * PI * i as f64 / 50.0;
            let beta = 2.0 * PI * j as f64 / 20.0;
            let got = family_moments(alpha, beta);
            for (n, want) in reference_moments(alpha, beta).iter().enumerate() {
                worst[n] = worst[n].max((got.values()[n] - want).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let max = worst.iter().cloned().fold(0.0, f64::max);
    let detail = format!(
        "max_err={max:.3e} per_order=[{}] runtime={secs:.2}s",
        worst.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>().join(",")
    );
    verdict(1, max <= 1e-12 && secs < 10.0, detail);
}

#[test]
fn criterion_02_hankel_determinant_values() {
    let cases = [
        (1, FRAC_PI_2, FRAC_PI_2, -3.0 / 16.0),
        (2, FRAC_PI_2, 0.0, -5.0 / 2048.0),
        (3, FRAC_PI_2, FRAC_PI_4, -1.0 / 262_144.0),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (m, alpha, beta, want) in cases {
        let got = family_det(alpha, beta, m);
        let ok = (got - want).abs() <= 1e-14;
        pass &= ok;
        parts.push(format!("H{m}: got={got:.6e} want={want:.6e} {}", if ok { "ok" } else { "off" }));
    }
    verdict(2, pass, parts.join("; "));
}

#[test]
fn criterion_03_minimal_order_sweep_and_sign_regions() {
    let config = SweepConfig {
        alpha: AlphaGrid { start: 0.0, stop: 2.0 * PI, count: 201 },
        betas: vec![FRAC_PI_2, 0.0, FRAC_PI_4],
        m_max: 3,
        tolerances: Tolerances::default(),
    };
    let rows = run_sweep(&config, Execution::default()).unwrap();
    let mut order_misses = [0usize; 3];
    let mut zero_misses = 0usize;
    for (b, want) in [1usize, 2, 3].iter().enumerate() {
        for r in &rows[b * 201..(b + 1) * 201] {
            if r.alpha.sin().abs() > 1e-6 {
                if r.minimal_order != *want {
                    order_misses[b] += 1;
                }
            } else if r.minimal_order != 0 {
                zero_misses += 1;
            }
        }
    }
    let mut sign_misses = [0usize; 3];
    for i in 0..201 {
        let alpha = 2.0 * PI * i as f64 / 200.0;
        if alpha.sin().abs() <= 1e-6 {
            continue;
        }
        for j in 0..40 {
            let beta = 2.0 * PI * j as f64 / 40.0 + 0.013;
            let ms = family_moments(alpha, beta);
            let conditions = [
                (2.0 * beta).cos() < 0.0,
                (4.0 * beta).cos() > 0.0,
                (2.0 * beta).sin().powi(2) > 0.0,
            ];
            for (m, cond) in (1..=3).zip(conditions) {
                if (hankel(&ms, m).unwrap().det() < 0.0) != cond {
                    sign_misses[m - 1] += 1;
                }
            }
        }
    }
    let pass = order_misses == [0; 3] && zero_misses == 0 && sign_misses == [0; 3];
    verdict(
        3,
        pass,
        format!(
            "order_misses(beta=pi/2,0,pi/4)={order_misses:?} zero_misses={zero_misses} \
             sign_region_misses(H1,H2,H3)={sign_misses:?} of 7960 each"
        ),
    );
}

#[test]
fn criterion_04_twirl_law() {
    let mut law = 0.0f64;
    let mut kraus = 0.0f64;
    for d in 2..=6 {
        for seed in 0..100 {
            let rho = random_density(d, 40_000 + 100 * d as u64 + seed).unwrap();
            let t = y_twirl(&rho);
            for m in 0..d {
                for n in 0..d {
                    let want = if m == n {
                        C64::new(1.0 / d as f64, 0.0)
                    } else {
                        C64::new(0.0, 2.0 / d as f64 * rho.get(m, n).im)
                    };
                    law = law.max((t.get(m, n) - want).norm());
                }
            }
            kraus = kraus.max(t.matrix().max_abs_diff(&y_twirl_kraus(&rho)).unwrap());
        }
    }
    verdict(4, law <= 1e-12 && kraus <= 1e-12, format!("law_residual={law:.3e} kraus_gap={kraus:.3e}"));
}

#[test]
fn criterion_05_nonpositivity_equals_l1_coherence() {
    let mut fourier = 0.0f64;
    for d in 2..=6 {
        let a = computational_basis(d).unwrap();
        let b = fourier_mub(&a);
        for seed in 0..100 {
            let rho = random_density(d, 50_000 + 100 * d as u64 + seed).unwrap();
            let q = extended_kd(&rho, &a, &b).unwrap();
            fourier = fourier.max((nonpositivity(&q) - l1_coherence(&rho, &a).unwrap()).abs());
        }
    }
    let mut beta_gap = 0.0f64;
    let a = computational_basis(2).unwrap();
    for j in 0..20 {
        let b = qubit_beta_basis(2.0 * PI * j as f64 / 20.0);
        for seed in 0..20 {
            let rho = random_density(2, 55_000 + 20 * j + seed).unwrap();
            let q = extended_kd(&rho, &a, &b).unwrap();
            beta_gap = beta_gap.max((nonpositivity(&q) - l1_coherence(&rho, &a).unwrap()).abs());
        }
    }
    verdict(
        5,
        fourier <= 1e-11 && beta_gap <= 1e-11,
        format!("fourier_gap={fourier:.3e} beta_gap={beta_gap:.3e}"),
    );
}

#[test]
fn criterion_06_reconstruction_round_trip() {
    let mut worst = 0.0f64;
    for d in 2..=5 {
        let a = computational_basis(d).unwrap();
        let b = fourier_mub(&a);
        for seed in 0..100 {
            let rho = random_density(d, 60_000 + 100 * d as u64 + seed).unwrap();
            let back = reconstruct(&extended_kd(&rho, &a, &b).unwrap()).unwrap();
            worst = worst.max(back.matrix().max_abs_diff(rho.matrix()).unwrap());
        }
    }
    verdict(6, worst <= 1e-10, format!("max_entry_residual={worst:.3e}"));
}

#[test]
fn criterion_07_positive_distributions_are_hankel_psd() {
    let mut min_det = f64::INFINITY;
    let mut vdm = 0.0f64;
    for seed in 0..100u64 {
        let d = 2 + (seed as usize % 4);
        // half from KD tensors of incoherent states (A = B), half from the same numbers fed directly
        let rho = random_diagonal_density(d, 70_000 + seed).unwrap();
        let a = computational_basis(d).unwrap();
        let q = extended_kd(&rho, &a, &a).unwrap();
        let lambda: Vec<f64> = q.values().iter().map(|z| z.re).collect();
        assert!(lambda.iter().all(|&l| l >= 0.0));
        let ms = if seed % 2 == 0 {
            moments(&q, 7, 1e-9).unwrap()
        } else {
            let vals: Vec<C64> = lambda.iter().map(|&l| C64::new(l, 0.0)).collect();
            moments_from_values(&vals, 7, 1e-9, "positive").unwrap()
        };
        for m in 1..=3 {
            let h = hankel(&ms, m).unwrap();
            min_det = min_det.min(h.det());
            for (x, y) in h.entries().iter().zip(vandermonde_hankel(&lambda, m)) {
                vdm = vdm.max((x - y).abs());
            }
        }
    }
    verdict(
        7,
        min_det >= -1e-13 && vdm <= 1e-12,
        format!("min_det={min_det:.3e} vandermonde_gap={vdm:.3e}"),
    );
}

#[test]
fn criterion_08_total_visibility_equals_l1_imaginarity() {
    let mut worst = [0.0f64; 4];
    let mut quadrature = 0.0f64;
    for d in 2..=5 {
        for seed in 0..200 {
            let rho = random_density(d, 80_000 + 1000 * d as u64 + seed).unwrap();
            let v = total_visibility_imaginarity(&rho).unwrap();
            let m = l1_imaginarity(&rho);
            worst[d - 2] = worst[d - 2].max((v.total - m).abs());
            quadrature = quadrature.max((v.total_quadrature - m).abs());
        }
    }
    // qutrit breakdown against 2|y_j|
    let rows = vec![
        vec![C64::new(0.4, 0.0), C64::new(0.05, 0.1), C64::new(-0.02, -0.07)],
        vec![C64::new(0.05, -0.1), C64::new(0.35, 0.0), C64::new(0.03, 0.12)],
        vec![C64::new(-0.02, 0.07), C64::new(0.03, -0.12), C64::new(0.25, 0.0)],
    ];
    let rho = make_density(ComplexMatrix::from_rows(&rows).unwrap(), &Tolerances::default()).unwrap();
    let v = total_visibility_imaginarity(&rho).unwrap();
    let ys = [0.1, 0.07, 0.12];
    let breakdown = v
        .breakdown
        .iter()
        .zip(ys)
        .map(|(g, y)| (g.visibility - 2.0 * y).abs())
        .fold(0.0, f64::max);
    let max = worst.iter().cloned().fold(breakdown, f64::max);
    verdict(
        8,
        max <= 1e-11,
        format!(
            "visibility_gap(d=2..5)=[{}] qutrit_breakdown_gap={breakdown:.3e} quadrature_gap={quadrature:.3e}",
            worst.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(",")
        ),
    );
}

#[test]
fn criterion_09_multi_copy_moment_realization() {
    let mut unitarity = [0.0f64; 3];
    let mut moment_gap = [0.0f64; 6];
    let mut route_gap = 0.0f64;
    for d in [2, 3] {
        let a = computational_basis(d).unwrap();
        let b = fourier_mub(&a);
        for n in 1..=3 {
            unitarity[n - 1] = unitarity[n - 1].max(s_n_operator(&a, &b, n).unwrap().unitarity_residual());
        }
        for seed in 0..10 {
            let rho = y_twirl(&random_density(d, 90_000 + 100 * d as u64 + seed).unwrap());
            let ms = moments(&extended_kd(&rho, &a, &b).unwrap(), 7, 1e-9).unwrap();
            for n in 2..=7 {
                let mv = moment_via_visibility(&rho, &a, &b, n).unwrap();
                moment_gap[n - 2] = moment_gap[n - 2].max((mv.visibility - ms.r(n).unwrap()).abs());
                if let Some(g) = mv.route_gap() {
                    route_gap = route_gap.max(g);
                }
            }
        }
    }
    let pass = unitarity.iter().all(|&u| u <= 1e-11)
        && moment_gap.iter().all(|&g| g <= 1e-11)
        && route_gap <= 1e-11;
    verdict(
        9,
        pass,
        format!(
            "unitarity_residual(n=1..3)={} moment_gap(n=2..7)={} dense_vs_factorized={route_gap:.2e}",
            sci(&unitarity),
            sci(&moment_gap)
        ),
    );
}

#[test]
fn criterion_10_interferometer_consistency() {
    let mut routes = 0.0f64;
    let mut grid = 0.0f64;
    for d in 2..=4 {
        for seed in 0..50 {
            let rho = random_density(d, 100_000 + 100 * d as u64 + seed).unwrap();
            let u = random_unitary(d, 110_000 + 100 * d as u64 + seed).unwrap();
            let theta = 2.0 * PI * seed as f64 / 50.0;
            let a = mz_final_state(&rho, &u, theta).unwrap();
            let b = mz_final_state_conjugated(&rho, &u, theta).unwrap();
            routes = routes.max(a.matrix().max_abs_diff(b.matrix()).unwrap());
            let v = visibility(&rho, &u, VisibilityMethod::Both, 360).unwrap();
            grid = grid.max((v.grid.unwrap() - v.analytic.unwrap()).abs());
        }
    }
    verdict(10, routes <= 1e-12 && grid <= 1e-6, format!("route_gap={routes:.3e} grid_gap={grid:.3e}"));
}

#[test]
fn criterion_11_no_false_positives_on_real_states() {
    let tol = Tolerances::default();
    let mut hits = 0;
    let mut max_imag = 0.0f64;
    for d in [2, 3] {
        let a = computational_basis(d).unwrap();
        let b = fourier_mub(&a);
        for seed in 0..250 {
            let rho = random_real_density(d, 120_000 + seed).unwrap();
            max_imag = rho.matrix().as_slice().iter().fold(max_imag, |m, z| m.max(z.im.abs()));
            if detect(&rho, &a, &b, 3, &tol).unwrap().detected() {
                hits += 1;
            }
        }
    }
    verdict(11, hits == 0 && max_imag == 0.0, format!("detected={hits} of 500 max_imag={max_imag:e}"));
}
