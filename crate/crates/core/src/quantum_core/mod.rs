//! Dense complex linear algebra: matrices, kets, observables, density
//! matrices and a Jacobi eigensolver for Hermitian operators.
//!
//! Bipartite operators are always laid out as (particle 1) ⊗ (particle 2).

mod eigen;
mod matrix;
mod state;

pub use eigen::{eig_hermitian, jacobi_eigen, HermitianEigen, DEFAULT_MAX_SWEEPS};
pub use matrix::{kron, ComplexMatrix, DEFAULT_MAX_ENTRIES};
pub use num_complex::Complex64 as Complex;
pub use state::{
    density_diagnostics, expectation, is_psd, projector_from_kets, DensityDiagnostics,
    DensityMatrix, Ket, Observable,
};

/// Tolerance for Hermiticity, trace, positivity and projector checks.
pub const STRUCTURAL_TOL: f64 = 1e-9;

/// Allowed Gram-matrix deviation for orthonormal families.
pub const GRAM_TOL: f64 = 1e-8;

/// Allowed eigen-reconstruction residual per unit of dimension.
pub const SPECTRAL_TOL_PER_DIM: f64 = 1e-8;
