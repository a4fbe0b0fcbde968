use num_complex::Complex64;

use super::eigen::{eig_hermitian, jacobi_eigen, DEFAULT_MAX_SWEEPS};
use super::matrix::ComplexMatrix;
use super::{GRAM_TOL, STRUCTURAL_TOL};
use crate::error::{Error, Result};

/// Column vector of amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amplitudes: Vec<Complex64>,
}

impl Ket {
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyMatrix { rows: 0, cols: 1 });
        }
        if let Some(k) = amplitudes
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite { row: k, col: 0 });
        }
        Ok(Self { amplitudes })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::from_amplitudes(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// ⟨self|other⟩, conjugate-linear in `self`.
    pub fn inner(&self, other: &Ket) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                op: "inner",
                left: (self.dim(), 1),
                right: (other.dim(), 1),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// True when the ket is a normalized state vector (norm within 1e-9 of 1).
    pub fn is_state(&self) -> bool {
        (self.norm() - 1.0).abs() <= STRUCTURAL_TOL
    }

    /// Tensor product `self ⊗ other`, with `self` as the outer factor.
    pub fn kron(&self, other: &Ket) -> Ket {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for &a in &self.amplitudes {
            out.extend(other.amplitudes.iter().map(|&b| a * b));
        }
        Ket { amplitudes: out }
    }

    pub fn scale(&self, factor: Complex64) -> Ket {
        Ket {
            amplitudes: self.amplitudes.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn sub(&self, other: &Ket) -> Result<Ket> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                op: "sub",
                left: (self.dim(), 1),
                right: (other.dim(), 1),
            });
        }
        Ok(Ket {
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(&a, &b)| a - b)
                .collect(),
        })
    }

    /// |self⟩⟨other|.
    pub fn outer(&self, other: &Ket) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim(), other.dim());
        for (i, &a) in self.amplitudes.iter().enumerate() {
            for (j, &b) in other.amplitudes.iter().enumerate() {
                m.set(i, j, a * b.conj());
            }
        }
        m
    }

    /// Ket as a column matrix.
    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::new(self.dim(), 1, self.amplitudes.clone()).expect("non-empty ket")
    }
}

/// Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable(ComplexMatrix);

impl Observable {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                op: "Observable::new",
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let deviation = matrix.hermiticity_deviation();
        if deviation > STRUCTURAL_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self(matrix))
    }

    pub fn identity(n: usize) -> Self {
        Self(ComplexMatrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// `self ⊗ other`; Kronecker products of Hermitian operators stay Hermitian.
    pub fn kron(&self, other: &Observable) -> Result<Observable> {
        Ok(Self(self.0.kron(&other.0)?))
    }

    /// `I - self`.
    pub fn complement(&self) -> Observable {
        Self(
            ComplexMatrix::identity(self.dim())
                .sub(&self.0)
                .expect("square operator"),
        )
    }

    /// Max entrywise deviation from `Π² = Π`.
    pub fn idempotency_deviation(&self) -> f64 {
        self.0
            .matmul(&self.0)
            .and_then(|sq| sq.max_abs_diff(&self.0))
            .expect("square operator")
    }
}

/// Unit-trace, Hermitian, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

/// Structural diagnostics of a candidate density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityDiagnostics {
    pub trace: f64,
    pub hermiticity_deviation: f64,
    pub min_eigenvalue: f64,
}

impl DensityDiagnostics {
    pub fn passes(&self) -> bool {
        (self.trace - 1.0).abs() <= STRUCTURAL_TOL
            && self.hermiticity_deviation <= STRUCTURAL_TOL
            && self.min_eigenvalue >= -STRUCTURAL_TOL
    }
}

pub fn density_diagnostics(m: &ComplexMatrix) -> Result<DensityDiagnostics> {
    let trace = m.trace()?;
    let eig = jacobi_eigen(m, DEFAULT_MAX_SWEEPS)?;
    Ok(DensityDiagnostics {
        trace: trace.re,
        hermiticity_deviation: m.hermiticity_deviation(),
        min_eigenvalue: eig.min_eigenvalue(),
    })
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity, all within 1e-9.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let dm = Self::check_cheap(matrix)?;
        let eig = jacobi_eigen(&dm.0, DEFAULT_MAX_SWEEPS)?;
        if eig.min_eigenvalue() < -STRUCTURAL_TOL {
            return Err(Error::NotPsd {
                min_eigenvalue: eig.min_eigenvalue(),
            });
        }
        Ok(dm)
    }

    /// Checks Hermiticity and trace only. For matrices positive by construction
    /// (projections of valid states, closed-form mixtures).
    pub(crate) fn check_cheap(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                op: "DensityMatrix::new",
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let deviation = matrix.hermiticity_deviation();
        if deviation > STRUCTURAL_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = matrix.trace()?;
        if (trace.re - 1.0).abs() > STRUCTURAL_TOL || trace.im.abs() > STRUCTURAL_TOL {
            return Err(Error::NotUnitTrace { trace: trace.re });
        }
        Ok(Self(matrix))
    }

    pub fn pure(ket: &Ket) -> Result<Self> {
        if !ket.is_state() {
            return Err(Error::NotUnitTrace {
                trace: ket.norm().powi(2),
            });
        }
        Self::check_cheap(ket.outer(ket))
    }

    /// I / n.
    pub fn maximally_mixed(n: usize) -> Self {
        Self(ComplexMatrix::identity(n).scale_real(1.0 / n as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn diagnostics(&self) -> Result<DensityDiagnostics> {
        density_diagnostics(&self.0)
    }

    /// `U ρ U†`; the caller supplies a unitary.
    pub fn conjugate_by(&self, unitary: &ComplexMatrix) -> Result<Self> {
        let m = unitary.matmul(&self.0)?.matmul(&unitary.dagger())?;
        Self::check_cheap(m)
    }
}

/// Real part of `trace(ρ · obs)`; errors if the imaginary part exceeds 1e-9.
pub fn expectation(rho: &DensityMatrix, obs: &Observable) -> Result<f64> {
    if rho.dim() != obs.dim() {
        return Err(Error::DimensionMismatch {
            op: "expectation",
            left: rho.matrix().shape(),
            right: obs.matrix().shape(),
        });
    }
    let z = rho.matrix().trace_of_product(obs.matrix())?;
    if z.im.abs() > STRUCTURAL_TOL {
        return Err(Error::ComplexExpectation { imag: z.im });
    }
    Ok(z.re)
}

/// True iff the smallest eigenvalue is at least `-tol`.
pub fn is_psd(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    let obs = Observable::new(m.clone())?;
    Ok(eig_hermitian(&obs)?.min_eigenvalue() >= -tol)
}

/// Σ |k⟩⟨k| over an orthonormal family.
pub fn projector_from_kets(kets: &[Ket]) -> Result<Observable> {
    let first = kets.first().ok_or(Error::InvalidMeasurement {
        reason: "projector needs at least one ket".into(),
    })?;
    let n = first.dim();
    let mut deviation: f64 = 0.0;
    for (i, a) in kets.iter().enumerate() {
        for (j, b) in kets.iter().enumerate() {
            let g = a.inner(b)?;
            let target = if i == j { 1.0 } else { 0.0 };
            deviation = deviation.max((g - Complex64::new(target, 0.0)).norm());
        }
    }
    if deviation > GRAM_TOL {
        return Err(Error::NonOrthonormal { deviation });
    }
    let mut m = ComplexMatrix::zeros(n, n);
    for k in kets {
        m = m.add(&k.outer(k))?;
    }
    Observable::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, k: usize) -> Ket {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        Ket::from_real(&v).unwrap()
    }

    #[test]
    fn expectation_examples() {
        let sz = Observable::new(ComplexMatrix::from_diag(&[1.0, -1.0])).unwrap();
        let i2 = Observable::identity(2);
        let mixed = DensityMatrix::maximally_mixed(4);
        assert_eq!(expectation(&mixed, &sz.kron(&i2).unwrap()).unwrap(), 0.0);
        assert!((expectation(&mixed, &Observable::identity(4)).unwrap() - 1.0).abs() < 1e-15);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = Ket::from_real(&[0.0, h, -h, 0.0]).unwrap();
        let rho = DensityMatrix::pure(&singlet).unwrap();
        let zz = sz.kron(&sz).unwrap();
        assert!((expectation(&rho, &zz).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(
            expectation(&rho, &sz),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn expectation_rejects_imaginary_part() {
        // Bypass validation to feed a corrupted state.
        let mut m = ComplexMatrix::from_diag(&[0.5, 0.5]);
        m.set(0, 1, Complex64::new(0.0, 0.5));
        m.set(1, 0, Complex64::new(0.0, 0.5));
        let rho = DensityMatrix(m);
        let sx = Observable::new(ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap())
            .unwrap();
        assert!(matches!(
            expectation(&rho, &sx),
            Err(Error::ComplexExpectation { .. })
        ));
    }

    #[test]
    fn psd_examples() {
        assert!(is_psd(&ComplexMatrix::from_diag(&[1.0, 0.0, 2.0]), 1e-9).unwrap());
        assert!(!is_psd(&ComplexMatrix::from_diag(&[1.0, -0.5]), 1e-9).unwrap());
    }

    #[test]
    fn basis_projector() {
        let p = projector_from_kets(&[e(5, 0), e(5, 1)]).unwrap();
        assert_eq!(
            p.matrix(),
            &ComplexMatrix::from_diag(&[1.0, 1.0, 0.0, 0.0, 0.0])
        );
        assert!(p.idempotency_deviation() < 1e-12);
    }

    #[test]
    fn projector_rejects_non_orthonormal() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let diag = Ket::from_real(&[h, h, 0.0]).unwrap();
        assert!(matches!(
            projector_from_kets(&[e(3, 0), diag]),
            Err(Error::NonOrthonormal { .. })
        ));
        let long = Ket::from_real(&[2.0, 0.0, 0.0]).unwrap();
        assert!(projector_from_kets(&[long]).is_err());
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::from_diag(&[0.5, 0.5])).is_ok());
        assert!(matches!(
            DensityMatrix::new(ComplexMatrix::from_diag(&[0.5, 0.6])),
            Err(Error::NotUnitTrace { .. })
        ));
        assert!(matches!(
            DensityMatrix::new(ComplexMatrix::from_diag(&[1.5, -0.5])),
            Err(Error::NotPsd { .. })
        ));
        let mut m = ComplexMatrix::from_diag(&[0.5, 0.5]);
        m.set(0, 1, Complex64::new(0.1, 0.0));
        assert!(matches!(
            DensityMatrix::new(m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn observable_requires_hermitian() {
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            Observable::new(m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn ket_kron_ordering() {
        // |1⟩ ⊗ |2⟩ in d = 3 sits at index 0·3 + 1.
        let k = e(3, 0).kron(&e(3, 1));
        assert_eq!(k.amplitudes()[1], Complex64::new(1.0, 0.0));
        assert_eq!(k.dim(), 9);
    }
}
