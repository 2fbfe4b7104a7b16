//! Small dense square matrices and the symmetric eigen machinery needed by the
//! Bures-Wasserstein geometry.
//!
//! 2×2 matrices (the common case) live inline without heap allocation and use
//! closed forms; larger matrices go through a cyclic Jacobi eigensolver.

use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Componentwise symmetry tolerance, scaled by `max(1, max |m_ij|)`.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Eigenvalues in `[-EIGEN_DUST, 0)` are treated as roundoff and clamped.
pub const EIGEN_DUST: f64 = 1e-12;

const JACOBI_REL_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Row-major square matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: SmallVec<[f64; 4]>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = self.data.chunks(self.dim.max(1)).collect();
        f.debug_tuple("Matrix").field(&rows).finish()
    }
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: SmallVec::from_elem(0.0, dim * dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = d;
        }
        m
    }

    pub fn from_row_major(dim: usize, data: &[f64]) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self {
            dim,
            data: SmallVec::from_slice(data),
        })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let mut data = SmallVec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// `self · m · self` for symmetric `self` and `m`, symmetrized.
    pub fn congruence(&self, m: &Self) -> Self {
        self.matmul(m).matmul(self).symmetrized()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add_identity(&self, s: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            m.data[i * self.dim + i] += s;
        }
        m
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn is_symmetric(&self) -> bool {
        self.max_asymmetry() <= SYMMETRY_TOL * self.max_abs().max(1.0)
    }

    pub fn symmetrized(mut self) -> Self {
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                self.set(i, j, v);
                self.set(j, i, v);
            }
        }
        self
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn ensure_symmetric(&self) -> Result<()> {
        if self.is_symmetric() {
            Ok(())
        } else {
            Err(Error::NotSymmetric {
                max_asymmetry: self.max_asymmetry(),
            })
        }
    }
}

/// Eigen-decomposition of a symmetric matrix; `vectors` holds eigenvectors
/// in its columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEigen {
    /// `V · diag(f(λ)) · Vᵀ`.
    pub fn reconstruct(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.values.len();
        let fl: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v: f64 = (0..n)
                    .map(|k| self.vectors.get(i, k) * fl[k] * self.vectors.get(j, k))
                    .sum();
                out.set(i, j, v);
                out.set(j, i, v);
            }
        }
        out
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
///
/// Sweeps until the off-diagonal Frobenius norm drops below
/// `1e-13 · ‖m‖_F` or 100 sweeps have run.
pub fn jacobi_eigen(m: &Matrix) -> SymEigen {
    let n = m.dim();
    let mut a = m.clone().symmetrized();
    let mut v = Matrix::identity(n);
    let target = JACOBI_REL_TOL * m.frobenius_norm();

    let off = |a: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a.get(i, j) * a.get(i, j);
                }
            }
        }
        s.sqrt()
    };

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    SymEigen {
        values: (0..n).map(|i| a.get(i, i)).collect(),
        vectors: v,
    }
}

/// Eigenvalues of a symmetric 2×2 matrix, ascending.
pub fn eigenvalues_2x2(m: &Matrix) -> [f64; 2] {
    let a = m.get(0, 0);
    let d = m.get(1, 1);
    let b = 0.5 * (m.get(0, 1) + m.get(1, 0));
    let mean = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    [mean - r, mean + r]
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &Matrix) -> f64 {
    match m.dim() {
        0 => f64::INFINITY,
        1 => m.get(0, 0),
        2 => eigenvalues_2x2(m)[0],
        _ => jacobi_eigen(m).min_value(),
    }
}

fn check_psd(min_eig: f64) -> Result<()> {
    if min_eig < -EIGEN_DUST {
        Err(Error::NotPositiveDefinite {
            min_eigenvalue: min_eig,
        })
    } else {
        Ok(())
    }
}

/// Principal square root of a symmetric positive semi-definite matrix.
///
/// Eigenvalues down to `-1e-12` are clamped to zero; anything more negative
/// is rejected.
pub fn spd_sqrt(m: &Matrix) -> Result<Matrix> {
    m.ensure_symmetric()?;
    match m.dim() {
        1 => {
            let v = m.get(0, 0);
            check_psd(v)?;
            Matrix::from_row_major(1, &[v.max(0.0).sqrt()])
        }
        2 => {
            check_psd(eigenvalues_2x2(m)[0])?;
            let a = m.get(0, 0);
            let d = m.get(1, 1);
            let b = 0.5 * (m.get(0, 1) + m.get(1, 0));
            let s = (a * d - b * b).max(0.0).sqrt();
            let t = (a + d + 2.0 * s).max(0.0).sqrt();
            if t == 0.0 {
                return Ok(Matrix::zeros(2));
            }
            Matrix::from_row_major(2, &[(a + s) / t, b / t, b / t, (d + s) / t])
        }
        _ => {
            let eig = jacobi_eigen(m);
            check_psd(eig.min_value())?;
            Ok(eig.reconstruct(|l| l.max(0.0).sqrt()))
        }
    }
}

/// Inverse of a symmetric positive definite matrix's principal square root.
pub fn spd_inv_sqrt(m: &Matrix) -> Result<Matrix> {
    m.ensure_symmetric()?;
    let min_eig = min_eigenvalue(m);
    if min_eig <= EIGEN_DUST {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min_eig,
        });
    }
    match m.dim() {
        1 => Matrix::from_row_major(1, &[1.0 / m.get(0, 0).sqrt()]),
        2 => {
            let r = spd_sqrt(m)?;
            let det = r.get(0, 0) * r.get(1, 1) - r.get(0, 1) * r.get(1, 0);
            Matrix::from_row_major(
                2,
                &[
                    r.get(1, 1) / det,
                    -r.get(0, 1) / det,
                    -r.get(1, 0) / det,
                    r.get(0, 0) / det,
                ],
            )
        }
        _ => Ok(jacobi_eigen(m).reconstruct(|l| 1.0 / l.sqrt())),
    }
}

/// Solve the Lyapunov equation `Σ L + L Σ = V` for symmetric `V` and SPD `Σ`.
pub fn lyapunov_solve(sigma: &Matrix, v: &Matrix) -> Matrix {
    let eig = jacobi_eigen(sigma);
    let q = &eig.vectors;
    let rotated = q.transpose().matmul(v).matmul(q);
    let n = sigma.dim();
    let mut l = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            l.set(i, j, rotated.get(i, j) / (eig.values[i] + eig.values[j]));
        }
    }
    q.matmul(&l).matmul(&q.transpose()).symmetrized()
}
