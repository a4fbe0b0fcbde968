use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest number of entries `kron` will allocate unless told otherwise.
pub const DEFAULT_MAX_ENTRIES: u128 = 100_000_000;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(Error::BadEntryCount {
                len: data.len(),
                expected: rows * cols,
            });
        }
        if let Some(k) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite {
                row: k / cols,
                col: k % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in diag.iter().enumerate() {
            m.data[i * n + i] = Complex64::new(x, 0.0);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.data[i * self.cols + j] = z;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let aik = self.data[i * self.cols + k];
                if aik == ZERO {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += aik * b;
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Result<Complex64> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                op: "trace",
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok((0..self.rows).map(|i| self.get(i, i)).sum())
    }

    /// `trace(self · other)` without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> Result<Complex64> {
        if self.cols != other.rows || self.rows != other.cols {
            return Err(Error::DimensionMismatch {
                op: "trace_of_product",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self.data[i * self.cols + k] * other.data[k * other.cols + i];
            }
        }
        Ok(acc)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    fn zip_with(
        &self,
        other: &Self,
        op: &'static str,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Square root of the summed squared moduli of `self - other`.
    pub fn frobenius_distance(&self, other: &Self) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                op: "frobenius_distance",
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                op: "max_abs_diff",
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// max |M - M†| over all entries; infinite for non-square input.
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    /// `self += weight · |ket⟩⟨ket|`, touching only the ket's nonzero amplitudes.
    pub fn add_outer_assign(&mut self, amplitudes: &[Complex64], weight: f64) -> Result<()> {
        if !self.is_square() || amplitudes.len() != self.rows {
            return Err(Error::DimensionMismatch {
                op: "add_outer_assign",
                left: self.shape(),
                right: (amplitudes.len(), 1),
            });
        }
        let support: Vec<(usize, Complex64)> = amplitudes
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, z)| *z != ZERO)
            .collect();
        for &(i, a) in &support {
            for &(j, b) in &support {
                self.data[i * self.cols + j] += a * b.conj() * weight;
            }
        }
        Ok(())
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        self.kron_with_limit(other, DEFAULT_MAX_ENTRIES)
    }

    /// Kronecker product with the left factor outermost: block (i, j) is `self[i, j] · other`.
    pub fn kron_with_limit(&self, other: &Self, max_entries: u128) -> Result<Self> {
        let rows = self.rows as u128 * other.rows as u128;
        let cols = self.cols as u128 * other.cols as u128;
        let entries = rows * cols;
        if entries > max_entries {
            return Err(Error::DimensionOverflow {
                entries,
                limit: max_entries,
            });
        }
        let (rows, cols) = (rows as usize, cols as usize);
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let aij = self.get(i, j);
                if aij == ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    let row = i * other.rows + k;
                    let base = row * cols + j * other.cols;
                    for l in 0..other.cols {
                        out.data[base + l] = aij * other.get(k, l);
                    }
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, " ")?;
            for j in 0..self.cols {
                let z = self.get(i, j);
                write!(f, " {:+.4}{:+.4}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Free-function form of [`ComplexMatrix::kron`].
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.kron(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::from_diag(&[1.0, -1.0])
    }

    #[test]
    fn kron_identities() {
        let i4 = kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(i4, ComplexMatrix::identity(4));
        let d = kron(
            &ComplexMatrix::from_diag(&[1.0, 2.0]),
            &ComplexMatrix::from_diag(&[3.0, 4.0]),
        )
        .unwrap();
        assert_eq!(d, ComplexMatrix::from_diag(&[3.0, 4.0, 6.0, 8.0]));
    }

    #[test]
    fn kron_sigma_z_sigma_x_matches_block_expansion() {
        // σz ⊗ σx = [[σx, 0], [0, -σx]]
        #[rustfmt::skip]
        let expected = ComplexMatrix::from_real(4, 4, &[
            0.0,  1.0,  0.0,  0.0,
            1.0,  0.0,  0.0,  0.0,
            0.0,  0.0,  0.0, -1.0,
            0.0,  0.0, -1.0,  0.0,
        ])
        .unwrap();
        assert_eq!(kron(&sigma_z(), &sigma_x()).unwrap(), expected);
    }

    #[test]
    fn kron_rectangular_shape() {
        let a = ComplexMatrix::from_real(1, 2, &[1.0, 2.0]).unwrap();
        let b = ComplexMatrix::from_real(3, 1, &[1.0, 0.0, -1.0]).unwrap();
        let k = a.kron(&b).unwrap();
        assert_eq!(k.shape(), (3, 2));
        assert_eq!(k.get(2, 1), c(-2.0, 0.0));
    }

    #[test]
    fn kron_respects_limit() {
        let a = ComplexMatrix::identity(10);
        let err = a.kron_with_limit(&a, 9_999).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionOverflow {
                entries: 10_000,
                ..
            }
        ));
        assert!(a.kron_with_limit(&a, 10_000).is_ok());
    }

    #[test]
    fn basic_operations() {
        assert_eq!(ComplexMatrix::identity(4).trace().unwrap(), c(4.0, 0.0));
        let m = ComplexMatrix::new(
            2,
            3,
            (0..6).map(|k| c(k as f64, -(k as f64) / 2.0)).collect(),
        )
        .unwrap();
        assert_eq!(m.dagger().dagger(), m);
        assert_eq!(m.frobenius_distance(&m).unwrap(), 0.0);
        assert!(matches!(m.trace(), Err(Error::NotSquare { .. })));
        assert!(matches!(m.matmul(&m), Err(Error::DimensionMismatch { .. })));
        let prod = m.matmul(&m.dagger()).unwrap();
        assert_eq!(prod.shape(), (2, 2));
        assert!(prod.hermiticity_deviation() < 1e-12);
        let tp = m.trace_of_product(&m.dagger()).unwrap();
        assert!((tp - prod.trace().unwrap()).norm() < 1e-12);
    }

    #[test]
    fn constructor_validation() {
        assert!(matches!(
            ComplexMatrix::new(2, 2, vec![ZERO; 3]),
            Err(Error::BadEntryCount {
                len: 3,
                expected: 4
            })
        ));
        assert!(matches!(
            ComplexMatrix::new(0, 2, vec![]),
            Err(Error::EmptyMatrix { .. })
        ));
        assert!(matches!(
            ComplexMatrix::new(1, 2, vec![ZERO, c(f64::NAN, 0.0)]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
    }
}
