//! Metric spaces: Euclidean ℝ^d, the circle S¹, Bures-Wasserstein SPD
//! matrices and booklets, with distances, exponential/logarithm maps and
//! geodesics behind a single [`Space`] dispatch.

pub mod booklet;
pub mod bures;
pub mod circle;
pub mod matrix;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use booklet::BookletPoint;
pub use bures::SpdMatrix;
pub use circle::CirclePoint;
pub use matrix::{jacobi_eigen, spd_sqrt, Matrix};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EuclideanPoint {
    coords: Vec<f64>,
}

impl EuclideanPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPoint(
                "non-finite Euclidean coordinate".into(),
            ));
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// A point in one of the supported spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "space", content = "value", rename_all = "snake_case")]
pub enum Point {
    Euclidean(EuclideanPoint),
    Circle(CirclePoint),
    Spd(SpdMatrix),
    Booklet(BookletPoint),
}

impl Point {
    pub fn angle(theta: f64) -> Self {
        Point::Circle(CirclePoint::from_radians(theta))
    }

    pub fn real(x: f64) -> Self {
        Point::Euclidean(EuclideanPoint { coords: vec![x] })
    }

    pub fn vector(coords: Vec<f64>) -> Result<Self> {
        Ok(Point::Euclidean(EuclideanPoint::new(coords)?))
    }

    pub fn spd(m: Matrix) -> Result<Self> {
        Ok(Point::Spd(SpdMatrix::new(m)?))
    }

    pub fn booklet(branch: usize, spine: f64, page: Vec<f64>) -> Result<Self> {
        Ok(Point::Booklet(BookletPoint::new(branch, spine, page)?))
    }

    pub fn as_circle(&self) -> Option<&CirclePoint> {
        match self {
            Point::Circle(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_spd(&self) -> Option<&SpdMatrix> {
        match self {
            Point::Spd(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_booklet(&self) -> Option<&BookletPoint> {
        match self {
            Point::Booklet(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_euclidean(&self) -> Option<&EuclideanPoint> {
        match self {
            Point::Euclidean(e) => Some(e),
            _ => None,
        }
    }
}

/// Tangent vector in the representation matching its space.
#[derive(Debug, Clone, PartialEq)]
pub enum Tangent {
    /// Signed angle on S¹.
    Angle(f64),
    Vector(Vec<f64>),
    /// Symmetric matrix at a Bures-Wasserstein base point.
    Symmetric(Matrix),
}

/// A metric space descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Space {
    Euclidean { dim: usize },
    Circle,
    BuresWasserstein { dim: usize },
    Booklet { branches: usize, dim: usize },
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Euclidean { dim } => write!(f, "R^{dim}"),
            Space::Circle => write!(f, "S^1"),
            Space::BuresWasserstein { dim } => write!(f, "BW({dim}x{dim})"),
            Space::Booklet { branches, dim } => write!(f, "B_{dim}^{branches}"),
        }
    }
}

impl Space {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "Euclidean dimension must be positive".into(),
            ));
        }
        Ok(Space::Euclidean { dim })
    }

    pub fn circle() -> Self {
        Space::Circle
    }

    pub fn bures_wasserstein(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "matrix dimension must be positive".into(),
            ));
        }
        Ok(Space::BuresWasserstein { dim })
    }

    /// Booklet with `branches ≥ 2` pages of dimension `dim ≥ 1`
    /// (page coordinates have length `dim − 1`).
    pub fn booklet(branches: usize, dim: usize) -> Result<Self> {
        if branches < 2 || dim < 1 {
            return Err(Error::InvalidParameter(format!(
                "booklet needs k >= 2 branches and d >= 1, got k={branches}, d={dim}"
            )));
        }
        Ok(Space::Booklet { branches, dim })
    }

    fn mismatch(&self, reason: impl Into<String>) -> Error {
        Error::SpaceMismatch {
            space: self.to_string(),
            reason: reason.into(),
        }
    }

    /// Check that `p` is a valid point of this space.
    pub fn check(&self, p: &Point) -> Result<()> {
        match (self, p) {
            (Space::Euclidean { dim }, Point::Euclidean(e)) => {
                if e.coords.len() != *dim {
                    return Err(Error::DimensionMismatch {
                        expected: *dim,
                        found: e.coords.len(),
                    });
                }
                Ok(())
            }
            (Space::Circle, Point::Circle(_)) => Ok(()),
            (Space::BuresWasserstein { dim }, Point::Spd(m)) => {
                if m.dim() != *dim {
                    return Err(Error::DimensionMismatch {
                        expected: *dim,
                        found: m.dim(),
                    });
                }
                Ok(())
            }
            (Space::Booklet { branches, dim }, Point::Booklet(b)) => {
                if b.branch() > *branches {
                    return Err(self.mismatch(format!("branch {} out of range", b.branch())));
                }
                if b.page().len() != dim - 1 {
                    return Err(Error::DimensionMismatch {
                        expected: dim - 1,
                        found: b.page().len(),
                    });
                }
                Ok(())
            }
            _ => Err(self.mismatch(format!("{p:?}"))),
        }
    }

    pub fn check_all(&self, pts: &[Point]) -> Result<()> {
        pts.iter().try_for_each(|p| self.check(p))
    }

    pub fn distance(&self, a: &Point, b: &Point) -> Result<f64> {
        match (a, b) {
            (Point::Euclidean(x), Point::Euclidean(y)) => {
                if x.coords.len() != y.coords.len() {
                    return Err(Error::DimensionMismatch {
                        expected: x.coords.len(),
                        found: y.coords.len(),
                    });
                }
                Ok(x.coords
                    .iter()
                    .zip(&y.coords)
                    .map(|(u, v)| (u - v) * (u - v))
                    .sum::<f64>()
                    .sqrt())
            }
            (Point::Circle(x), Point::Circle(y)) => Ok(x.distance(y)),
            (Point::Spd(x), Point::Spd(y)) => bures::distance(x, y),
            (Point::Booklet(x), Point::Booklet(y)) => {
                if x.page().len() != y.page().len() {
                    return Err(Error::DimensionMismatch {
                        expected: x.page().len(),
                        found: y.page().len(),
                    });
                }
                Ok(booklet::distance(x, y))
            }
            _ => Err(self.mismatch("points from different spaces")),
        }
    }

    /// Squared distance; avoids a square root round trip where possible.
    pub fn squared_distance(&self, a: &Point, b: &Point) -> Result<f64> {
        match (a, b) {
            (Point::Booklet(x), Point::Booklet(y)) if x.page().len() == y.page().len() => {
                Ok(booklet::squared_distance(x, y))
            }
            _ => self.distance(a, b).map(|d| d * d),
        }
    }

    pub fn exp(&self, base: &Point, v: &Tangent) -> Result<Point> {
        match (base, v) {
            (Point::Euclidean(x), Tangent::Vector(v)) => {
                if v.len() != x.coords.len() {
                    return Err(Error::DimensionMismatch {
                        expected: x.coords.len(),
                        found: v.len(),
                    });
                }
                Point::vector(x.coords.iter().zip(v).map(|(a, b)| a + b).collect())
            }
            (Point::Circle(x), Tangent::Angle(v)) => Ok(Point::Circle(x.exp(*v))),
            (Point::Spd(x), Tangent::Symmetric(v)) => Ok(Point::Spd(bures::exp(x, v)?)),
            (Point::Booklet(_), _) => {
                Err(Error::Unsupported("exponential map on a booklet".into()))
            }
            _ => Err(self.mismatch("tangent vector does not match base point")),
        }
    }

    pub fn log(&self, base: &Point, target: &Point) -> Result<Tangent> {
        match (base, target) {
            (Point::Euclidean(x), Point::Euclidean(y)) => {
                if x.coords.len() != y.coords.len() {
                    return Err(Error::DimensionMismatch {
                        expected: x.coords.len(),
                        found: y.coords.len(),
                    });
                }
                Ok(Tangent::Vector(
                    y.coords.iter().zip(&x.coords).map(|(a, b)| a - b).collect(),
                ))
            }
            (Point::Circle(x), Point::Circle(y)) => Ok(Tangent::Angle(x.log(y)?)),
            (Point::Spd(x), Point::Spd(y)) => Ok(Tangent::Symmetric(bures::log(x, y)?)),
            (Point::Booklet(_), Point::Booklet(_)) => {
                Err(Error::Unsupported("logarithm map on a booklet".into()))
            }
            _ => Err(self.mismatch("points from different spaces")),
        }
    }

    /// Point at parameter `t` on the geodesic from `a` (t = 0) to `b` (t = 1).
    pub fn geodesic(&self, a: &Point, b: &Point, t: f64) -> Result<Point> {
        match (a, b) {
            (Point::Booklet(x), Point::Booklet(y)) => {
                Ok(Point::Booklet(booklet::geodesic(x, y, t)?))
            }
            (Point::Spd(x), Point::Spd(y)) => Ok(Point::Spd(bures::geodesic(x, y, t)?)),
            _ => {
                let v = self.log(a, b)?;
                let scaled = match v {
                    Tangent::Angle(s) => Tangent::Angle(s * t),
                    Tangent::Vector(v) => Tangent::Vector(v.into_iter().map(|c| c * t).collect()),
                    Tangent::Symmetric(m) => Tangent::Symmetric(m.scale(t)),
                };
                self.exp(a, &scaled)
            }
        }
    }
}
