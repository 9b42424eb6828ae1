//! Continuum discretization and a from-scratch symmetric tridiagonal
//! eigensolver (Sturm bisection plus inverse iteration).

mod discretize;
mod oracle;
mod solve;

use thiserror::Error;

use crate::lattice::LatticeError;
use crate::symexpr::ExprError;

pub use discretize::{discretize_effective, discretize_operator, sample_on_grid, Grid};
pub use oracle::{dense_eig_oracle, ORACLE_MAX_N};
pub use solve::{
    eigenpairs, eigenvector, lowest_eigenvalues, pivot_guard, sturm_count, Eigenvector,
    DEFAULT_TOL, MAX_INVERSE_ITERATIONS,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("requested {k} eigenvalues of a {n}x{n} matrix")]
    KOutOfRange { k: usize, n: usize },
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("operator of order {0} cannot be discretized by the three-point stencil")]
    OrderTooHigh(u32),
    #[error("operator is not in divergence form: first-order coefficient `{c1}` differs from the derivative of `{c2}`")]
    NotDivergenceForm { c1: String, c2: String },
    #[error("kinetic coefficient {0}")]
    SignChange(String),
    #[error("inverse iteration at lambda = {lambda} stalled with residual {residual:e} after {iterations} iterations")]
    NoConvergence { lambda: f64, residual: f64, iterations: usize },
    #[error("dense oracle is limited to N <= {max}, got {n}")]
    OracleTooLarge { n: usize, max: usize },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// How a [`SpectrumResult`] was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverMeta {
    pub method: &'static str,
    /// Relative tolerance; brackets are refined to `tol * width`.
    pub tol: f64,
    /// Gershgorin width of the matrix.
    pub width: f64,
    /// Magnitude substituted for vanishing Sturm pivots.
    pub pivot_guard: f64,
    /// Largest number of bisection steps spent on one eigenvalue.
    pub max_bisection_steps: usize,
    /// Inverse iteration count per eigenvector (empty if none computed).
    pub inverse_iterations: Vec<usize>,
    pub seed: Option<u64>,
    /// Every off-diagonal entry is nonzero, so the spectrum must be simple.
    pub unreduced: bool,
    /// Consecutive returned eigenvalues are strictly increasing.
    pub strictly_separated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    /// `‖Tv - λv‖₂` per pair; empty without eigenvectors.
    pub residuals: Vec<f64>,
    pub meta: SolverMeta,
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
