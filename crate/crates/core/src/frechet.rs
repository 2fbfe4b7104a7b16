//! Empirical Fréchet function, mean and variance.
//!
//! Each space has an exact or convergent strategy:
//!
//! * ℝ^d: arithmetic mean.
//! * S¹: the empirical Fréchet function is piecewise quadratic with breakpoints
//!   at the antipodes of the sample. Unwrapping the sample into each of the `n`
//!   windows anchored at a sorted sample angle gives every quadratic piece; the
//!   stationary point of a piece is a local minimum when it falls inside the
//!   piece. All local minima are compared on the exact objective.
//! * Bures-Wasserstein: barycenter fixed-point iteration
//!   `S ← S^{-1/2} ((1/n) Σ (S^{1/2} X_i S^{1/2})^{1/2})² S^{-1/2}`.
//! * Booklet: pages average independently; the spine coordinate on branch `z`
//!   minimizes a one-dimensional quadratic clamped at the spine.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::bures::{self, SpdMatrix};
use crate::geometry::matrix::{spd_inv_sqrt, spd_sqrt, Matrix};
use crate::geometry::{BookletPoint, CirclePoint, Point, Space};

/// Relative objective gap below which two distinct minimizers are a tie.
pub const NON_UNIQUE_REL_GAP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FrechetEstimate {
    pub mean: Point,
    pub variance: f64,
    pub objective_evaluations: usize,
    pub converged: bool,
}

/// Stopping rule for the Bures-Wasserstein fixed-point iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BwMeanOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for BwMeanOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 1000,
        }
    }
}

/// `(1/n) Σ d(X_i, ω)²`.
pub fn frechet_objective(space: &Space, sample: &[Point], omega: &Point) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::Empty("Fréchet objective of an empty sample"));
    }
    let mut total = 0.0;
    for x in sample {
        total += space.squared_distance(x, omega)?;
    }
    Ok(total / sample.len() as f64)
}

/// Empirical Fréchet variance about a supplied mean.
pub fn frechet_variance(space: &Space, sample: &[Point], mean: &Point) -> Result<f64> {
    frechet_objective(space, sample, mean)
}

/// Brute-force minimizer of the empirical Fréchet function over `grid`;
/// ties resolve to the earliest grid point.
pub fn frechet_mean_oracle(space: &Space, sample: &[Point], grid: &[Point]) -> Result<Point> {
    if grid.is_empty() {
        return Err(Error::Empty("oracle grid"));
    }
    let mut best: Option<(f64, &Point)> = None;
    for g in grid {
        let f = frechet_objective(space, sample, g)?;
        if best.is_none_or(|(bf, _)| f < bf) {
            best = Some((f, g));
        }
    }
    Ok(best.map(|(_, g)| g.clone()).expect("grid is non-empty"))
}

pub fn frechet_mean(space: &Space, sample: &[Point]) -> Result<FrechetEstimate> {
    frechet_mean_with(space, sample, BwMeanOptions::default())
}

pub fn frechet_mean_with(
    space: &Space,
    sample: &[Point],
    bw: BwMeanOptions,
) -> Result<FrechetEstimate> {
    if sample.is_empty() {
        return Err(Error::Empty("Fréchet mean of an empty sample"));
    }
    space.check_all(sample)?;
    match space {
        Space::Euclidean { dim } => euclidean_mean(space, sample, *dim),
        Space::Circle => circle_mean(sample),
        Space::BuresWasserstein { .. } => {
            let mats: Vec<&SpdMatrix> = sample.iter().filter_map(Point::as_spd).collect();
            let (mean, iterations, converged) = bw_mean(&mats, bw, |_| {})?;
            let mean = Point::Spd(mean);
            let variance = frechet_objective(space, sample, &mean)?;
            Ok(FrechetEstimate {
                mean,
                variance,
                objective_evaluations: iterations + 1,
                converged,
            })
        }
        Space::Booklet { branches, .. } => booklet_mean(space, sample, *branches),
    }
}

fn euclidean_mean(space: &Space, sample: &[Point], dim: usize) -> Result<FrechetEstimate> {
    let mut acc = vec![0.0; dim];
    for p in sample {
        let e = p.as_euclidean().expect("checked");
        for (a, c) in acc.iter_mut().zip(e.coords()) {
            *a += c;
        }
    }
    let n = sample.len() as f64;
    let mean = Point::vector(acc.into_iter().map(|a| a / n).collect())?;
    let variance = frechet_objective(space, sample, &mean)?;
    Ok(FrechetEstimate {
        mean,
        variance,
        objective_evaluations: 1,
        converged: true,
    })
}

fn circle_objective(angles: &[f64], m: f64) -> f64 {
    let c = CirclePoint::from_radians(m);
    angles
        .iter()
        .map(|&t| {
            let d = c.distance(&CirclePoint::from_radians(t));
            d * d
        })
        .sum::<f64>()
        / angles.len() as f64
}

/// Pick the best of `(point, objective)` candidates, failing on a tie between
/// distinct points.
fn unique_best<P>(
    mut candidates: Vec<(P, f64)>,
    distinct: impl Fn(&P, &P) -> bool,
) -> Result<(P, f64)> {
    candidates.sort_by(|a, b| a.1.total_cmp(&b.1));
    let best_f = candidates[0].1;
    let threshold = NON_UNIQUE_REL_GAP * best_f.max(f64::MIN_POSITIVE);
    for other in &candidates[1..] {
        let gap = other.1 - best_f;
        if gap > threshold {
            break;
        }
        if distinct(&candidates[0].0, &other.0) {
            return Err(Error::NonUniqueMean { gap });
        }
    }
    Ok(candidates.swap_remove(0))
}

fn circle_mean(sample: &[Point]) -> Result<FrechetEstimate> {
    let mut angles: Vec<f64> = sample
        .iter()
        .map(|p| p.as_circle().expect("checked").theta())
        .collect();
    angles.sort_by(f64::total_cmp);
    let n = angles.len();
    let nf = n as f64;
    let total: f64 = angles.iter().sum();
    let mut sum_sq: f64 = angles.iter().map(|t| t * t).sum();

    const SLACK: f64 = 1e-9;
    let mut local_minima: Vec<(f64, f64)> = Vec::new();
    for j in 0..n {
        // The first j sorted angles are unwrapped by +2π.
        if j > 0 {
            let t = angles[j - 1];
            sum_sq += 4.0 * PI * t + 4.0 * PI * PI;
        }
        let m = (total + TAU * j as f64) / nf;
        let lo = angles[j];
        let hi = if j > 0 {
            angles[j - 1] + TAU
        } else {
            angles[n - 1]
        };
        if lo >= m - PI - SLACK && hi <= m + PI + SLACK {
            local_minima.push((m, sum_sq / nf - m * m));
        }
    }
    if local_minima.is_empty() {
        return Err(Error::Degenerate(
            "no local minimum of the circular Fréchet function".into(),
        ));
    }

    // Piecewise estimates can carry cancellation error; re-evaluate every
    // candidate near the best one exactly.
    let best_est = local_minima
        .iter()
        .map(|c| c.1)
        .fold(f64::INFINITY, f64::min);
    let mut evaluations = 0;
    let exact: Vec<(f64, f64)> = local_minima
        .into_iter()
        .filter(|c| c.1 <= best_est + 1e-8 * best_est.abs().max(1.0))
        .map(|(m, _)| {
            evaluations += 1;
            let m = CirclePoint::from_radians(m).theta();
            (m, circle_objective(&angles, m))
        })
        .collect();

    let (mean, variance) = unique_best(exact, |a, b| {
        CirclePoint::from_radians(*a).distance(&CirclePoint::from_radians(*b)) > 1e-9
    })?;
    Ok(FrechetEstimate {
        mean: Point::angle(mean),
        variance,
        objective_evaluations: evaluations,
        converged: true,
    })
}

/// Bures-Wasserstein barycenter by fixed-point iteration, initialized at the
/// arithmetic average. `on_iterate` sees every iterate, starting with the
/// initial point. Returns `(mean, iterations, converged)`.
pub fn bw_mean(
    sample: &[&SpdMatrix],
    options: BwMeanOptions,
    mut on_iterate: impl FnMut(&SpdMatrix),
) -> Result<(SpdMatrix, usize, bool)> {
    if sample.is_empty() {
        return Err(Error::Empty("Bures-Wasserstein mean of an empty sample"));
    }
    let dim = sample[0].dim();
    let n = sample.len() as f64;
    let mut avg = Matrix::zeros(dim);
    for x in sample {
        avg = avg.add(x.matrix());
    }
    let mut s = SpdMatrix::new(avg.scale(1.0 / n))?;
    on_iterate(&s);

    for it in 1..=options.max_iterations {
        let root = spd_sqrt(s.matrix())?;
        let inv_root = spd_inv_sqrt(s.matrix())?;
        let mut k = Matrix::zeros(dim);
        for x in sample {
            k = k.add(&spd_sqrt(&root.congruence(x.matrix()))?);
        }
        let k = k.scale(1.0 / n);
        let next = SpdMatrix::new(inv_root.congruence(&k.matmul(&k).symmetrized()))?;
        let step = bures::distance(&s, &next)?;
        s = next;
        on_iterate(&s);
        if step < options.tolerance {
            return Ok((s, it, true));
        }
    }
    Ok((s, options.max_iterations, false))
}

fn booklet_mean(space: &Space, sample: &[Point], branches: usize) -> Result<FrechetEstimate> {
    let pts: Vec<&BookletPoint> = sample.iter().filter_map(Point::as_booklet).collect();
    let n = pts.len() as f64;
    let page_dim = pts[0].page().len();

    let mut page = vec![0.0; page_dim];
    let mut spine_by_branch = vec![0.0; branches + 1];
    for p in &pts {
        for (a, y) in page.iter_mut().zip(p.page()) {
            *a += y;
        }
        spine_by_branch[p.branch()] += p.spine();
    }
    page.iter_mut().for_each(|a| *a /= n);
    let total: f64 = spine_by_branch.iter().sum();

    let mut candidates = vec![BookletPoint::origin(page.clone())];
    for (z, &own) in spine_by_branch.iter().enumerate().skip(1) {
        let a = (own - (total - own)) / n;
        if a > 0.0 {
            candidates.push(BookletPoint::new(z, a, page.clone())?);
        }
    }

    let evaluations = candidates.len();
    let scored = candidates
        .into_iter()
        .map(|c| {
            let c = Point::Booklet(c);
            let f = frechet_objective(space, sample, &c)?;
            Ok((c, f))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean, variance) = unique_best(scored, |a, b| a != b)?;
    Ok(FrechetEstimate {
        mean,
        variance,
        objective_evaluations: evaluations,
        converged: true,
    })
}
