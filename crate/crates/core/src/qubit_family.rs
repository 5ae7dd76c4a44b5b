//! Closed forms for the twirled single-qubit family.
//!
//! State `|psi> = (|0> + e^{i alpha}|1>)/sqrt 2`, twirled to
//! `rho' = [[1/2, -i sin(alpha)/2], [i sin(alpha)/2, 1/2]]`, paired with the partner basis
//! `(|0> ± e^{i beta}|1>)/sqrt 2`. The extended KD tensor has four entries equal to `1/4`
//! and four equal to `±(i/4) e^{±i beta} sin(alpha)`, so with `X = sin^2 alpha`
//!
//! ```text
//! r_n = 4^{1-n}                                  n odd
//! r_n = 4^{1-n} + 4 (-1)^{n/2} X^{n/2} cos(n beta) / 4^n    n even
//! ```
//!
//! The determinants below are the exact expansions of `det H_m` for that sequence.

use std::f64::consts::FRAC_PI_2;

use crate::imaginarity::y_twirl;
use crate::state::{pure_density, DensityMatrix, PureState};

/// Pure state at `theta = pi/2` with relative phase `alpha`.
pub fn family_state(alpha: f64) -> DensityMatrix {
    pure_density(&PureState::qubit(FRAC_PI_2, alpha)).expect("unit vector")
}

/// Y-twirl of [`family_state`].
pub fn twirled_family_state(alpha: f64) -> DensityMatrix {
    y_twirl(&family_state(alpha))
}

/// `r_n` for any `n >= 1`.
pub fn closed_form_moment(alpha: f64, beta: f64, n: u32) -> f64 {
    assert!(n >= 1, "moments start at r_1");
    let base = 4f64.powi(1 - n as i32);
    if n % 2 == 1 {
        return base;
    }
    let half = (n / 2) as i32;
    let sign = if half % 2 == 0 { 1.0 } else { -1.0 };
    let x = alpha.sin().powi(2);
    base + 4.0 * sign * x.powi(half) * (n as f64 * beta).cos() / 4f64.powi(n as i32)
}

/// `[r_1, .., r_7]`.
pub fn closed_form_moments(alpha: f64, beta: f64) -> [f64; 7] {
    std::array::from_fn(|i| closed_form_moment(alpha, beta, i as u32 + 1))
}

/// `[det H_1, det H_2, det H_3]`.
pub fn closed_form_dets(alpha: f64, beta: f64) -> [f64; 3] {
    let x = alpha.sin().powi(2);
    let c2 = (2.0 * beta).cos();
    let c4 = (4.0 * beta).cos();
    let c6 = (6.0 * beta).cos();
    let h1 = x * c2 * (2.0 - x * c2) / 16.0;
    let h2 = -x * x * (x * c4 + c2).powi(2) / 4096.0;
    let g = c2 * c6 - c4 * c4;
    let h3 = x.powi(5) * g * (x.powi(3) * g - 2.0 * x * x * c6 - 4.0 * x * c4 - 2.0 * c2) / 16_777_216.0;
    [h1, h2, h3]
}
