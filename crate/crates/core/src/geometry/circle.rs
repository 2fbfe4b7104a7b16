//! The unit circle S¹ in angular representation.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points within this angular distance of the antipode are on the cut locus.
pub const CUT_LOCUS_TOL: f64 = 1e-12;

/// Wrap an angle into `[0, 2π)`.
///
/// Angles already in range are returned bit-for-bit unchanged.
#[inline]
pub fn wrap_angle(theta: f64) -> f64 {
    let mut r = theta % TAU;
    if r < 0.0 {
        r += TAU;
    }
    if r >= TAU {
        r = 0.0;
    }
    r
}

/// Signed shortest rotation from `from` to `to`, in `(-π, π]`.
#[inline]
pub fn signed_difference(from: f64, to: f64) -> f64 {
    let d = wrap_angle(to - from);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// A point on S¹ stored as its angle in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct CirclePoint {
    theta: f64,
}

impl CirclePoint {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidPoint(format!("non-finite angle {theta}")));
        }
        Ok(Self {
            theta: wrap_angle(theta),
        })
    }

    /// Construct from an angle known to be finite.
    pub fn from_radians(theta: f64) -> Self {
        Self {
            theta: wrap_angle(theta),
        }
    }

    pub fn from_degrees(deg: f64) -> Self {
        Self::from_radians(deg.to_radians())
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn degrees(&self) -> f64 {
        self.theta.to_degrees()
    }

    pub fn antipode(&self) -> Self {
        Self::from_radians(self.theta + PI)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        let d = (self.theta - other.theta).abs();
        d.min(TAU - d)
    }

    pub fn exp(&self, v: f64) -> Self {
        Self::from_radians(self.theta + v)
    }

    /// Signed angle `v` with `exp(v) = target`; fails at the antipode.
    pub fn log(&self, target: &Self) -> Result<f64> {
        let v = signed_difference(self.theta, target.theta);
        if v.abs() > PI - CUT_LOCUS_TOL {
            return Err(Error::CutLocus);
        }
        Ok(v)
    }

    /// Angular reflection `2θ_self − θ_x`, the geodesic symmetry about `self`.
    pub fn reflect(&self, x: &Self) -> Self {
        Self::from_radians(2.0 * self.theta - x.theta)
    }
}
