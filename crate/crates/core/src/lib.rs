//! Detection and quantification of quantum imaginarity.
//!
//! The detector Y-twirls a state, builds its extended Kirkwood-Dirac distribution
//! against a mutually unbiased pair of bases, and tests the Hankel matrices of the
//! distribution's moments for negative determinants. A Mach-Zehnder simulation
//! exposes the same quantities as interference visibilities.
//!
//! ```
//! use imkit::{detect, state, Tolerances};
//!
//! let rho = state::pure_density(&state::PureState::qubit(1.2, 0.7)).unwrap();
//! let a = state::computational_basis(2).unwrap();
//! let b = state::qubit_beta_basis(std::f64::consts::FRAC_PI_2);
//! let report = detect::detect(&rho, &a, &b, 3, &Tolerances::default()).unwrap();
//! assert_eq!(report.minimal_order, Some(1));
//! ```

pub mod detect;
pub mod error;
pub mod imaginarity;
pub mod interferometer;
pub mod kd;
pub mod linalg;
pub mod moments;
pub mod par;
pub mod qubit_family;
pub mod state;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use par::Execution;
pub use state::{DensityMatrix, OrthonormalBasis, Tolerances};
