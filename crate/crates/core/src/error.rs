use thiserror::Error;

/// Errors raised by state validation, tensor construction and the detection pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {dim} is too small (need at least {min})")]
    DimensionTooSmall { dim: usize, min: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("expected {expected} entries, found {found}")]
    EntryCount { expected: usize, found: usize },

    #[error("matrix is not Hermitian: max |rho_mn - conj(rho_nm)| = {residual:e}")]
    NotHermitian { residual: f64 },

    #[error("trace is not one: |Tr(rho) - 1| = {residual:e}")]
    NotUnitTrace { residual: f64 },

    #[error("matrix is not positive semidefinite: minimum eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("state vector is not normalized: norm {norm}")]
    NotNormalized { norm: f64 },

    #[error("vectors do not form an orthonormal basis: max |<v_i|v_j> - delta_ij| = {residual:e}")]
    NotOrthonormal { residual: f64 },

    #[error("matrix is not unitary: max |U^dag U - I| = {residual:e}")]
    NotUnitary { residual: f64 },

    #[error("bases are not mutually unbiased: worst overlap deviation {deviation:e}")]
    NotMub { deviation: f64 },

    #[error("overlap <b_{k}|a_{i}> vanishes; reconstruction is undefined")]
    ZeroOverlap { i: usize, k: usize },

    #[error("moment r_{n} has imaginary part {residual:e} above tolerance")]
    NonRealMoment { n: usize, residual: f64 },

    #[error("Hankel matrix of order {order} needs moments up to r_{needed}, only {available} available")]
    InsufficientMoments {
        order: usize,
        needed: usize,
        available: usize,
    },

    #[error("dense operator on dimension {dim} exceeds limit {limit}; use the factorized contraction")]
    DenseLimitExceeded { dim: usize, limit: usize },

    #[error("interference contrast is degenerate (I_max + I_min = {sum:e})")]
    DegenerateContrast { sum: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
