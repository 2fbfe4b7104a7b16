//! Booklets: `k` half-spaces `ℝ₊ × ℝ^{d−1}` glued along their common
//! boundary (the spine). With `d = 1` this is the k-spider.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A booklet point `(branch, spine, page)`.
///
/// `branch` is 1-based. A point with `spine == 0` sits on the shared
/// boundary and is always stored with `branch == 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BookletPoint {
    branch: usize,
    spine: f64,
    page: Vec<f64>,
}

impl BookletPoint {
    pub fn new(branch: usize, spine: f64, page: Vec<f64>) -> Result<Self> {
        if branch == 0 {
            return Err(Error::InvalidPoint(
                "booklet branches are numbered from 1".into(),
            ));
        }
        if !spine.is_finite() || spine < 0.0 {
            return Err(Error::InvalidPoint(format!(
                "booklet spine coordinate must be finite and >= 0, got {spine}"
            )));
        }
        if page.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPoint(
                "non-finite booklet page coordinate".into(),
            ));
        }
        let branch = if spine == 0.0 { 1 } else { branch };
        Ok(Self {
            branch,
            spine,
            page,
        })
    }

    pub fn origin(page: Vec<f64>) -> Self {
        Self {
            branch: 1,
            spine: 0.0,
            page,
        }
    }

    pub fn branch(&self) -> usize {
        self.branch
    }

    pub fn spine(&self) -> f64 {
        self.spine
    }

    pub fn page(&self) -> &[f64] {
        &self.page
    }

    pub fn on_spine(&self) -> bool {
        self.spine == 0.0
    }

    /// Same point moved to another branch (identity on the spine).
    pub fn with_branch(&self, branch: usize) -> Self {
        Self {
            branch: if self.on_spine() { 1 } else { branch },
            spine: self.spine,
            page: self.page.clone(),
        }
    }
}

fn page_sq_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Squared spine part of the distance: same-branch `(x − x')²`, otherwise
/// the path through the spine `(x + x')²`.
pub fn spine_sq_distance(a: &BookletPoint, b: &BookletPoint) -> f64 {
    if a.branch == b.branch {
        (a.spine - b.spine).powi(2)
    } else {
        (a.spine + b.spine).powi(2)
    }
}

pub fn squared_distance(a: &BookletPoint, b: &BookletPoint) -> f64 {
    spine_sq_distance(a, b) + page_sq_distance(&a.page, &b.page)
}

pub fn distance(a: &BookletPoint, b: &BookletPoint) -> f64 {
    squared_distance(a, b).sqrt()
}

/// Constant-speed geodesic from `a` (t = 0) to `b` (t = 1).
///
/// Points on one branch (or touching the spine) are joined by a straight
/// segment which may be extended beyond `[0, 1]` while it stays in the
/// half-space. Points on different branches are joined through the spine and
/// only `t ∈ [0, 1]` is defined.
pub fn geodesic(a: &BookletPoint, b: &BookletPoint, t: f64) -> Result<BookletPoint> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("geodesic parameter {t}")));
    }
    let page: Vec<f64> = a
        .page
        .iter()
        .zip(&b.page)
        .map(|(y0, y1)| (1.0 - t) * y0 + t * y1)
        .collect();

    if a.branch == b.branch || a.on_spine() || b.on_spine() {
        let branch = if a.on_spine() { b.branch } else { a.branch };
        let spine = (1.0 - t) * a.spine + t * b.spine;
        if spine < -1e-12 {
            return Err(Error::Unsupported(format!(
                "geodesic extension to t = {t} leaves the half-space"
            )));
        }
        return BookletPoint::new(branch, spine.max(0.0), page);
    }

    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Unsupported(format!(
            "geodesic through the spine is only defined for t in [0, 1], got {t}"
        )));
    }
    let travelled = t * (a.spine + b.spine);
    if travelled <= a.spine {
        BookletPoint::new(a.branch, a.spine - travelled, page)
    } else {
        BookletPoint::new(b.branch, travelled - a.spine, page)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(z: usize, x: f64, y: f64) -> BookletPoint {
        BookletPoint::new(z, x, vec![y]).unwrap()
    }

    #[test]
    fn cross_branch_distance() {
        assert!((distance(&p(1, 1.0, 0.0), &p(2, 1.0, 0.0)) - 2.0).abs() < 1e-15);
        assert!((distance(&p(1, 1.0, 0.0), &p(1, 0.5, 0.0)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn spine_points_are_identified() {
        let a = p(1, 0.0, 3.0);
        let b = p(2, 0.0, 3.0);
        assert_eq!(a, b);
        assert_eq!(distance(&a, &b), 0.0);
        assert_eq!(b.branch(), 1);
    }

    #[test]
    fn rejects_negative_spine() {
        assert!(BookletPoint::new(1, -0.1, vec![0.0]).is_err());
        assert!(BookletPoint::new(0, 0.1, vec![0.0]).is_err());
    }

    #[test]
    fn geodesic_through_origin() {
        let mid = geodesic(&p(1, 1.0, 0.0), &p(2, 1.0, 0.0), 0.5).unwrap();
        assert_eq!(mid, p(1, 0.0, 0.0));
        let q = geodesic(&p(1, 1.0, 0.0), &p(2, 1.0, 2.0), 0.75).unwrap();
        assert_eq!(q.branch(), 2);
        assert!((q.spine() - 0.5).abs() < 1e-15);
        assert!((q.page()[0] - 1.5).abs() < 1e-15);
        assert!(geodesic(&p(1, 1.0, 0.0), &p(2, 1.0, 0.0), 1.5).is_err());
    }

    #[test]
    fn same_branch_extension() {
        let a = p(3, 1.0, 0.0);
        let b = p(3, 2.0, 0.0);
        let ext = geodesic(&a, &b, 2.0).unwrap();
        assert!((ext.spine() - 3.0).abs() < 1e-15);
        assert!(geodesic(&a, &b, -2.0).is_err());
        let from_spine = geodesic(&p(1, 0.0, 0.0), &b, 0.5).unwrap();
        assert_eq!(from_spine.branch(), 3);
    }
}
