//! Bures-Wasserstein geometry on symmetric positive definite matrices.
//!
//! Tangent vectors at a base point Σ are symmetric matrices `V` with
//! `exp_Σ(V) = (I + V) Σ (I + V)` and `log_Σ(Λ) = T − I`, where `T` is the
//! optimal transport map pushing `N(0, Σ)` onto `N(0, Λ)`. At the identity the
//! other common convention writes `exp_I(W) = (W/2 + I)²`; it is related by
//! `W = 2V` (see [`from_half_convention`] / [`to_half_convention`]).
//!
//! That convention extends to any base point by parametrizing tangent vectors
//! in ambient form `W = Σ V + V Σ`, so that `V` solves a Lyapunov equation
//! (see [`BaseFrame::from_ambient`] / [`BaseFrame::to_ambient`]).

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::matrix::{lyapunov_solve, min_eigenvalue, spd_inv_sqrt, spd_sqrt, Matrix, EIGEN_DUST};
use crate::error::{Error, Result};

/// A symmetric, strictly positive definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix(Matrix);

impl SpdMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.dim() == 0 {
            return Err(Error::InvalidPoint("empty SPD matrix".into()));
        }
        if !m.is_finite() {
            return Err(Error::InvalidPoint("non-finite SPD entry".into()));
        }
        m.ensure_symmetric()?;
        let m = m.symmetrized();
        let min_eig = min_eigenvalue(&m);
        if min_eig <= EIGEN_DUST {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min_eig,
            });
        }
        Ok(Self(m))
    }

    pub fn identity(dim: usize) -> Self {
        Self(Matrix::identity(dim))
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(Matrix::from_diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

impl Serialize for SpdMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[f64]> = self.0.as_slice().chunks(self.dim()).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpdMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        SpdMatrix::from_rows(&refs).map_err(serde::de::Error::custom)
    }
}

/// Precomputed square roots of a base point, reused across many maps.
#[derive(Debug, Clone)]
pub struct BaseFrame {
    sigma: Matrix,
    sqrt: Matrix,
    inv_sqrt: Matrix,
}

impl BaseFrame {
    pub fn new(base: &SpdMatrix) -> Result<Self> {
        Ok(Self {
            sigma: base.0.clone(),
            sqrt: spd_sqrt(&base.0)?,
            inv_sqrt: spd_inv_sqrt(&base.0)?,
        })
    }

    /// Optimal transport map `Σ^{-1/2} (Σ^{1/2} Λ Σ^{1/2})^{1/2} Σ^{-1/2}`.
    pub fn transport_map(&self, target: &SpdMatrix) -> Result<Matrix> {
        let inner = self.sqrt.congruence(&target.0);
        let root = spd_sqrt(&inner)?;
        Ok(self.inv_sqrt.congruence(&root))
    }

    pub fn log(&self, target: &SpdMatrix) -> Result<Matrix> {
        let t = self.transport_map(target)?;
        Ok(t.add_identity(-1.0))
    }

    pub fn exp(&self, v: &Matrix) -> Result<SpdMatrix> {
        check_tangent(v, self.sigma.dim())?;
        let step = v.add_identity(1.0);
        let out = step.congruence(&self.sigma);
        let min_eig = min_eigenvalue(&out);
        if min_eig <= EIGEN_DUST {
            return Err(Error::SingularResult {
                min_eigenvalue: min_eig,
            });
        }
        Ok(SpdMatrix(out))
    }

    /// Internal tangent vector `V` solving `Σ V + V Σ = W` for an ambient
    /// tangent vector `W`.
    pub fn from_ambient(&self, w: &Matrix) -> Result<Matrix> {
        check_tangent(w, self.sigma.dim())?;
        Ok(lyapunov_solve(&self.sigma, w))
    }

    pub fn to_ambient(&self, v: &Matrix) -> Matrix {
        self.sigma
            .matmul(v)
            .add(&v.matmul(&self.sigma))
            .symmetrized()
    }

    pub fn sigma(&self) -> &Matrix {
        &self.sigma
    }

    /// Squared Riemannian norm `tr(V Σ V)` of a tangent vector at this base.
    pub fn norm_sq(&self, v: &Matrix) -> f64 {
        v.matmul(&self.sigma).matmul(v).trace().max(0.0)
    }
}

fn check_tangent(v: &Matrix, dim: usize) -> Result<()> {
    if v.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.dim(),
        });
    }
    v.ensure_symmetric()
}

fn canonical_order<'a>(a: &'a SpdMatrix, b: &'a SpdMatrix) -> (&'a SpdMatrix, &'a SpdMatrix) {
    let ord =
        a.0.as_slice()
            .iter()
            .zip(b.0.as_slice())
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal);
    if ord == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    }
}

fn check_dims(a: &SpdMatrix, b: &SpdMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// `tr A + tr B − 2 tr (A^{1/2} B A^{1/2})^{1/2}`, clamped at zero.
pub fn squared_distance_closed_form(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    check_dims(a, b)?;
    let ra = spd_sqrt(&a.0)?;
    let inner = spd_sqrt(&ra.congruence(&b.0))?;
    Ok((a.0.trace() + b.0.trace() - 2.0 * inner.trace()).max(0.0))
}

/// Bures-Wasserstein distance.
///
/// Evaluates the trace closed form; when the result is small enough that the
/// trace difference has lost most of its significant digits, it is replaced by
/// the transport-map norm `‖log_A B‖_A`, which has no cancellation. The pair
/// is put in a canonical order first so that `d(a, b)` and `d(b, a)` are
/// bitwise identical.
pub fn distance(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    check_dims(a, b)?;
    if a == b {
        return Ok(0.0);
    }
    let (a, b) = canonical_order(a, b);
    let d2 = squared_distance_closed_form(a, b)?;
    let scale = a.0.trace() + b.0.trace();
    if d2 > 1e-6 * scale {
        return Ok(d2.sqrt());
    }
    let frame = BaseFrame::new(a)?;
    let v = frame.log(b)?;
    Ok(frame.norm_sq(&v).sqrt())
}

pub fn exp(base: &SpdMatrix, v: &Matrix) -> Result<SpdMatrix> {
    BaseFrame::new(base)?.exp(v)
}

pub fn log(base: &SpdMatrix, target: &SpdMatrix) -> Result<Matrix> {
    check_dims(base, target)?;
    BaseFrame::new(base)?.log(target)
}

/// Point at parameter `t` on the geodesic `exp_a(t · log_a b)`.
pub fn geodesic(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    check_dims(a, b)?;
    let frame = BaseFrame::new(a)?;
    let v = frame.log(b)?;
    frame.exp(&v.scale(t))
}

/// Geodesic symmetry `exp_c(−log_c x) = (2I − T) Σ_c (2I − T)`.
pub fn reflect(center: &BaseFrame, x: &SpdMatrix) -> Result<SpdMatrix> {
    let v = center.log(x)?;
    center.exp(&v.scale(-1.0))
}

/// Tangent vector in the `exp_I(W) = (W/2 + I)²` convention → internal.
pub fn from_half_convention(w: &Matrix) -> Matrix {
    w.scale(0.5)
}

/// Internal tangent vector → `exp_I(W) = (W/2 + I)²` convention.
pub fn to_half_convention(v: &Matrix) -> Matrix {
    v.scale(2.0)
}
