//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a[p][q]` with a
//! diagonal unitary, then applies the classical real Jacobi rotation that
//! annihilates the (now real) pivot. The product of all rotations is
//! accumulated into the eigenvector matrix.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use super::state::{Ket, Observable};
use crate::error::{Error, Result};

/// Sweep limit used by [`eig_hermitian`].
pub const DEFAULT_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal, in the same order as `eigenvalues`.
    pub eigenvectors: Vec<Ket>,
}

impl HermitianEigen {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    /// Σ λ_k v_k v_k†.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (&lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            out.add_outer_assign(v.amplitudes(), lambda)
                .expect("eigenvector length matches the matrix");
        }
        out
    }

    /// Groups numerically equal eigenvalues (within `tol`) and returns the
    /// orthogonal projector onto each eigenspace, ascending by eigenvalue.
    pub fn spectral_projectors(&self, tol: f64) -> Vec<(f64, ComplexMatrix)> {
        let n = self.eigenvalues.len();
        let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            match out.last_mut() {
                Some((first, members)) if (lambda - *first).abs() <= tol => members.push(k),
                _ => out.push((lambda, vec![k])),
            }
        }
        out.into_iter()
            .map(|(_, members)| {
                let mean = members.iter().map(|&k| self.eigenvalues[k]).sum::<f64>()
                    / members.len() as f64;
                let mut proj = ComplexMatrix::zeros(n, n);
                for &k in &members {
                    let amps = self.eigenvectors[k].amplitudes();
                    for i in 0..n {
                        for j in 0..n {
                            let z = proj.get(i, j) + amps[i] * amps[j].conj();
                            proj.set(i, j, z);
                        }
                    }
                }
                (mean, proj)
            })
            .collect()
    }
}

pub fn eig_hermitian(m: &Observable) -> Result<HermitianEigen> {
    jacobi_eigen(m.matrix(), DEFAULT_MAX_SWEEPS)
}

/// Eigendecomposition of a Hermitian matrix. Only the upper triangle's
/// conjugate symmetry is assumed; callers validate Hermiticity.
pub fn jacobi_eigen(m: &ComplexMatrix, max_sweeps: usize) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            op: "eig_hermitian",
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    let mut a: Vec<Complex64> = m.entries().to_vec();
    // Symmetrize so the iteration sees an exactly Hermitian matrix.
    for i in 0..n {
        a[i * n + i] = Complex64::new(a[i * n + i].re, 0.0);
        for j in i + 1..n {
            let z = 0.5 * (a[i * n + j] + a[j * n + i].conj());
            a[i * n + j] = z;
            a[j * n + i] = z.conj();
        }
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
    }

    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let threshold = f64::EPSILON * scale;
    let off_norm = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += a[i * n + j].norm_sqr();
            }
        }
        (2.0 * s).sqrt()
    };

    let mut converged = false;
    for _sweep in 0..max_sweeps {
        if off_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE || r <= 1e-300 * scale {
                    continue;
                }
                let phase = apq / r; // e^{iφ}
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta.is_infinite() {
                    0.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // J restricted to (p, q): [[c, s], [-s e^{-iφ}, c e^{-iφ}]]
                let jpp = Complex64::new(c, 0.0);
                let jpq = Complex64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;

                // A ← A J
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * jpp + akq * jqp;
                    a[k * n + q] = akp * jpq + akq * jqq;
                }
                // A ← J† A
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[q * n + k] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;
                // V ← V J
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * jpp + vkq * jqp;
                    v[k * n + q] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }
    if !converged {
        let off = off_norm(&a);
        if off > threshold {
            return Err(Error::NoConvergence {
                sweeps: max_sweeps,
                off_norm: off,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let eigenvalues = order.iter().map(|&k| a[k * n + k].re).collect();
    let eigenvectors = order
        .iter()
        .map(|&k| Ket::from_amplitudes((0..n).map(|i| v[i * n + k]).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}
