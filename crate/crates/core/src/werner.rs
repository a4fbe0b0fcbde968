//! Basis kets, two-level singlets, the Werner matrix and the flip operator.
//!
//! Basis labels are 1-based (`|1⟩ … |d⟩`) at this interface and map to
//! 0-based storage indices internally.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::quantum_core::{Complex, ComplexMatrix, DensityMatrix, Ket, Observable};

/// Default cap on the local dimension (joint matrices of 900×900).
pub const DEFAULT_MAX_D: usize = 30;

/// Smallest local dimension accepted by the constructors.
pub const MIN_D: usize = 2;

pub(crate) fn check_dimension(d: usize, cap: usize) -> Result<()> {
    if d < MIN_D {
        return Err(Error::DimensionTooSmall { d, min: MIN_D });
    }
    if d > cap {
        return Err(Error::DimensionTooLarge { d, cap });
    }
    Ok(())
}

/// Standard basis ket `|i⟩` of a `d`-dimensional space, `i` 1-based.
pub fn basis_ket(d: usize, i: usize) -> Result<Ket> {
    if i == 0 || i > d {
        return Err(Error::IndexOutOfRange { index: i, dim: d });
    }
    let mut amps = vec![Complex::new(0.0, 0.0); d];
    amps[i - 1] = Complex::new(1.0, 0.0);
    Ket::from_amplitudes(amps)
}

/// `(|i⟩₁|j⟩₂ − |j⟩₁|i⟩₂)/√2` on the d²-dimensional joint space.
pub fn singlet(d: usize, i: usize, j: usize) -> Result<Ket> {
    if i == 0 || i >= j || j > d {
        return Err(Error::InvalidSingletIndices { dim: d, i, j });
    }
    let ij = basis_ket(d, i)?.kron(&basis_ket(d, j)?);
    let ji = basis_ket(d, j)?.kron(&basis_ket(d, i)?);
    Ok(ij.sub(&ji)?.scale(Complex::new(FRAC_1_SQRT_2, 0.0)))
}

/// Σ_{i<j} |S_ij⟩⟨S_ij|, the projector onto the antisymmetric subspace.
pub fn antisymmetric_projector(d: usize) -> Result<ComplexMatrix> {
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for i in 1..=d {
        for j in i + 1..=d {
            m.add_outer_assign(singlet(d, i, j)?.amplitudes(), 1.0)?;
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WernerState {
    d: usize,
    rho: DensityMatrix,
}

impl WernerState {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn into_rho(self) -> DensityMatrix {
        self.rho
    }
}

/// W = (1/d²)·[(1/d)·I + 2·Σ_{i<j} |S_ij⟩⟨S_ij|] with the default dimension cap.
pub fn werner(d: usize) -> Result<WernerState> {
    werner_capped(d, DEFAULT_MAX_D)
}

pub fn werner_capped(d: usize, cap: usize) -> Result<WernerState> {
    check_dimension(d, cap)?;
    let n = d * d;
    let df = d as f64;
    let mut m = ComplexMatrix::identity(n).scale_real(1.0 / (df * df * df));
    for i in 1..=d {
        for j in i + 1..=d {
            m.add_outer_assign(singlet(d, i, j)?.amplitudes(), 2.0 / (df * df))?;
        }
    }
    // Positive by construction: a positive combination of I and projectors.
    let rho = DensityMatrix::check_cheap(m)?;
    Ok(WernerState { d, rho })
}

/// Swap operator V with V(|i⟩₁|j⟩₂) = |j⟩₁|i⟩₂, built from its action on basis kets.
pub fn flip_operator(d: usize) -> Result<Observable> {
    flip_operator_capped(d, DEFAULT_MAX_D)
}

pub fn flip_operator_capped(d: usize, cap: usize) -> Result<Observable> {
    check_dimension(d, cap)?;
    let n = d * d;
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            m.set(j * d + i, i * d + j, Complex::new(1.0, 0.0));
        }
    }
    Observable::new(m)
}

/// I − 2·Σ_{i<j} |S_ij⟩⟨S_ij|, the singlet-sum form of the flip operator.
pub fn flip_from_singlets(d: usize) -> Result<ComplexMatrix> {
    let anti = antisymmetric_projector(d)?;
    ComplexMatrix::identity(d * d).sub(&anti.scale_real(2.0))
}

/// Local permutation unitary U with U|i⟩ = |perm[i]⟩ (0-based `perm`).
pub fn permutation_unitary(perm: &[usize]) -> Result<ComplexMatrix> {
    let d = perm.len();
    let mut seen = vec![false; d];
    for &p in perm {
        if p >= d || seen[p] {
            return Err(Error::IndexOutOfRange {
                index: p + 1,
                dim: d,
            });
        }
        seen[p] = true;
    }
    let mut u = ComplexMatrix::zeros(d, d);
    for (i, &p) in perm.iter().enumerate() {
        u.set(p, i, Complex::new(1.0, 0.0));
    }
    Ok(u)
}
