//! Samplers for the experiment distributions.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Beta, Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::bures::{self, BaseFrame, SpdMatrix};
use crate::geometry::circle::wrap_angle;
use crate::geometry::{jacobi_eigen, BookletPoint, Matrix, Point, Space};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VonMisesComponent {
    pub weight: f64,
    pub mu: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec {
    VonMises {
        mu: f64,
        kappa: f64,
    },
    VonMisesMixture {
        components: Vec<VonMisesComponent>,
    },
    /// `exp_center(W)` for the ambient tangent vector `W = (M + Mᵀ)/2`, `M`
    /// standard Gaussian. At the identity this is `(W/2 + I)²`.
    ///
    /// With `truncate`, draws are kept only when the internal tangent vector
    /// has all eigenvalues in `(−1, 1)`. There the exponential map is
    /// injective and the geodesic symmetry about `center` maps the law onto
    /// itself; without truncation the squaring folds part of the mass and the
    /// law is no longer symmetric about `center`.
    BwTangentGaussian {
        center: SpdMatrix,
        truncate: bool,
    },
    /// Branch `Z ~ Categorical(weights)`, spine `X | Z ~ Beta(spine_laws[Z])`,
    /// page coordinates i.i.d. `N(page_mean, page_sd²)`.
    BookletHierarchical {
        weights: Vec<f64>,
        spine_laws: Vec<(f64, f64)>,
        page_mean: f64,
        page_sd: f64,
        page_dim: usize,
    },
    /// Spider (one-dimensional booklet) law symmetric about `center`.
    SpiderNormal {
        center: BookletPoint,
        branches: usize,
    },
}

fn check_weights(w: &[f64]) -> Result<()> {
    if w.is_empty() || w.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(Error::InvalidParameter(format!("invalid weights {w:?}")));
    }
    let s: f64 = w.iter().sum();
    if (s - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "weights sum to {s}, not 1"
        )));
    }
    Ok(())
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "von Mises kappa must be > 0, got {kappa}"
        )));
    }
    Ok(())
}

impl DistributionSpec {
    pub fn von_mises(mu: f64, kappa: f64) -> Result<Self> {
        let s = DistributionSpec::VonMises { mu, kappa };
        s.validate()?;
        Ok(s)
    }

    /// `(1 − p)·VM(π/2, κ) + p·VM(0, κ)`.
    pub fn two_component_mixture(p: f64, kappa: f64) -> Result<Self> {
        let s = DistributionSpec::VonMisesMixture {
            components: vec![
                VonMisesComponent {
                    weight: 1.0 - p,
                    mu: PI / 2.0,
                    kappa,
                },
                VonMisesComponent {
                    weight: p,
                    mu: 0.0,
                    kappa,
                },
            ],
        };
        s.validate()?;
        Ok(s)
    }

    /// The four-branch model: `Cat(4/7, 1/7, 1/7, 1/7)`, `Beta(20, 5)` on
    /// branch 1 and `Beta(5, 20)` elsewhere, page `N(1, 1)`.
    pub fn booklet_model() -> Self {
        DistributionSpec::BookletHierarchical {
            weights: vec![4.0 / 7.0, 1.0 / 7.0, 1.0 / 7.0, 1.0 / 7.0],
            spine_laws: vec![(20.0, 5.0), (5.0, 20.0), (5.0, 20.0), (5.0, 20.0)],
            page_mean: 1.0,
            page_sd: 1.0,
            page_dim: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DistributionSpec::VonMises { mu, kappa } => {
                check_kappa(*kappa)?;
                if !mu.is_finite() {
                    return Err(Error::InvalidParameter("non-finite von Mises mean".into()));
                }
            }
            DistributionSpec::VonMisesMixture { components } => {
                let w: Vec<f64> = components.iter().map(|c| c.weight).collect();
                check_weights(&w)?;
                for c in components {
                    check_kappa(c.kappa)?;
                }
            }
            DistributionSpec::BwTangentGaussian { .. } => {}
            DistributionSpec::BookletHierarchical {
                weights,
                spine_laws,
                page_sd,
                ..
            } => {
                check_weights(weights)?;
                if weights.len() < 2 || spine_laws.len() != weights.len() {
                    return Err(Error::InvalidParameter(
                        "need one spine law per branch and at least two branches".into(),
                    ));
                }
                if spine_laws.iter().any(|&(a, b)| !(a > 0.0 && b > 0.0)) {
                    return Err(Error::InvalidParameter(
                        "Beta parameters must be positive".into(),
                    ));
                }
                if page_sd.is_nan() || *page_sd <= 0.0 {
                    return Err(Error::InvalidParameter("page sd must be positive".into()));
                }
            }
            DistributionSpec::SpiderNormal { center, branches } => {
                if *branches < 2 || center.branch() > *branches || !center.page().is_empty() {
                    return Err(Error::InvalidParameter(
                        "spider needs k >= 2 and a center without page coordinates".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// The space the samples live in.
    pub fn space(&self) -> Space {
        match self {
            DistributionSpec::VonMises { .. } | DistributionSpec::VonMisesMixture { .. } => {
                Space::Circle
            }
            DistributionSpec::BwTangentGaussian { center, .. } => {
                Space::BuresWasserstein { dim: center.dim() }
            }
            DistributionSpec::BookletHierarchical {
                weights, page_dim, ..
            } => Space::Booklet {
                branches: weights.len(),
                dim: page_dim + 1,
            },
            DistributionSpec::SpiderNormal { branches, .. } => Space::Booklet {
                branches: *branches,
                dim: 1,
            },
        }
    }
}

/// One von Mises draw in `[0, 2π)` by the Best-Fisher rejection sampler.
pub fn sample_von_mises<R: Rng + ?Sized>(mu: f64, kappa: f64, rng: &mut R) -> f64 {
    if kappa < 1e-8 {
        return TAU * rng.random::<f64>();
    }
    let s = if kappa < 1e-5 {
        1.0 / kappa + kappa
    } else {
        let r = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
        let rho = (r - (2.0 * r).sqrt()) / (2.0 * kappa);
        (1.0 + rho * rho) / (2.0 * rho)
    };
    let w = loop {
        let u: f64 = rng.random();
        let z = (PI * u).cos();
        let w = (1.0 + s * z) / (s + z);
        let y = kappa * (s - w);
        let v: f64 = rng.random();
        if y * (2.0 - y) - v >= 0.0 || (y / v).ln() + 1.0 - y >= 0.0 {
            break w;
        }
    };
    let angle = w.clamp(-1.0, 1.0).acos();
    let signed = if rng.random::<f64>() < 0.5 {
        -angle
    } else {
        angle
    };
    wrap_angle(mu + signed)
}

fn categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

fn sample_bw<R: Rng + ?Sized>(
    frame: &BaseFrame,
    dim: usize,
    truncate: bool,
    rng: &mut R,
) -> SpdMatrix {
    loop {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, rng.sample::<f64, _>(StandardNormal));
            }
        }
        let w = m.add(&m.transpose()).scale(0.5);
        let v = frame.from_ambient(&w).expect("symmetric by construction");
        if truncate && jacobi_eigen(&v).values.iter().any(|l| l.abs() >= 1.0) {
            continue;
        }
        // A singular draw has probability zero; redraw rather than clamp.
        if let Ok(x) = frame.exp(&v) {
            return x;
        }
    }
}

fn sample_spider<R: Rng + ?Sized>(center: &BookletPoint, k: usize, rng: &mut R) -> Result<Point> {
    let z = rng.random_range(1..=k);
    let folded: f64 = rng.sample::<f64, _>(StandardNormal);
    if center.on_spine() || z != center.branch() {
        return Point::booklet(z, folded.abs(), vec![]);
    }
    let v = center.spine() + folded;
    if v >= 0.0 {
        return Point::booklet(z, v, vec![]);
    }
    // Negative draws cross the origin onto a uniformly chosen other branch.
    let mut other = rng.random_range(1..k);
    if other >= z {
        other += 1;
    }
    Point::booklet(other, -v, vec![])
}

/// `n` independent draws from `spec`.
pub fn sample<R: Rng + ?Sized>(
    spec: &DistributionSpec,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Point>> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "sample size must be at least 1".into(),
        ));
    }
    spec.validate()?;
    match spec {
        DistributionSpec::VonMises { mu, kappa } => Ok((0..n)
            .map(|_| Point::angle(sample_von_mises(*mu, *kappa, rng)))
            .collect()),
        DistributionSpec::VonMisesMixture { components } => {
            let w: Vec<f64> = components.iter().map(|c| c.weight).collect();
            Ok((0..n)
                .map(|_| {
                    let c = components[categorical(&w, rng)];
                    Point::angle(sample_von_mises(c.mu, c.kappa, rng))
                })
                .collect())
        }
        DistributionSpec::BwTangentGaussian { center, truncate } => {
            let frame = BaseFrame::new(center)?;
            Ok((0..n)
                .map(|_| Point::Spd(sample_bw(&frame, center.dim(), *truncate, rng)))
                .collect())
        }
        DistributionSpec::BookletHierarchical {
            weights,
            spine_laws,
            page_mean,
            page_sd,
            page_dim,
        } => {
            let betas = spine_laws
                .iter()
                .map(|&(a, b)| Beta::new(a, b))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let page_law = Normal::new(*page_mean, *page_sd)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            (0..n)
                .map(|_| {
                    let z = categorical(weights, rng);
                    let page: Vec<f64> = (0..*page_dim).map(|_| page_law.sample(rng)).collect();
                    let x = betas[z].sample(rng);
                    Point::booklet(z + 1, x, page)
                })
                .collect()
        }
        DistributionSpec::SpiderNormal { center, branches } => (0..n)
            .map(|_| sample_spider(center, *branches, rng))
            .collect(),
    }
}

/// Move the population mean of `spec` along a geodesic by `delta`.
///
/// Circle laws rotate every component by `delta`. The Bures-Wasserstein law
/// is recentered at `geodesic(center, direction, delta)`. Booklet laws have
/// no shift.
pub fn shift_spec(
    spec: &DistributionSpec,
    space: &Space,
    delta: f64,
    direction: Option<&Point>,
) -> Result<DistributionSpec> {
    if !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("shift {delta}")));
    }
    match spec {
        DistributionSpec::VonMises { mu, kappa } => Ok(DistributionSpec::VonMises {
            mu: mu + delta,
            kappa: *kappa,
        }),
        DistributionSpec::VonMisesMixture { components } => Ok(DistributionSpec::VonMisesMixture {
            components: components
                .iter()
                .map(|c| VonMisesComponent {
                    mu: c.mu + delta,
                    ..*c
                })
                .collect(),
        }),
        DistributionSpec::BwTangentGaussian { center, truncate } => {
            let target = direction.ok_or_else(|| {
                Error::InvalidParameter("BW shift needs a direction point".into())
            })?;
            space.check(target)?;
            let target = target
                .as_spd()
                .ok_or_else(|| Error::InvalidParameter("BW direction must be SPD".into()))?;
            Ok(DistributionSpec::BwTangentGaussian {
                center: bures::geodesic(center, target, delta)?,
                truncate: *truncate,
            })
        }
        DistributionSpec::BookletHierarchical { .. } | DistributionSpec::SpiderNormal { .. } => {
            Err(Error::Unsupported(
                "booklet laws are not shifted; move the null instead".into(),
            ))
        }
    }
}

/// Density of a circular law, with each component normalized numerically.
#[derive(Debug, Clone)]
pub struct CircleDensity {
    components: Vec<(VonMisesComponent, f64)>,
}

impl CircleDensity {
    pub fn new(spec: &DistributionSpec) -> Result<Self> {
        spec.validate()?;
        let components = match spec {
            DistributionSpec::VonMises { mu, kappa } => vec![VonMisesComponent {
                weight: 1.0,
                mu: *mu,
                kappa: *kappa,
            }],
            DistributionSpec::VonMisesMixture { components } => components.clone(),
            _ => return Err(Error::Unsupported("density of a non-circular law".into())),
        };
        // The periodic trapezoid rule is spectrally accurate for the
        // normalizing constant. exp(κ(cos − 1)) avoids overflow for large κ.
        const M: usize = 4096;
        let h = TAU / M as f64;
        let components = components
            .into_iter()
            .map(|c| {
                let z: f64 = (0..M)
                    .map(|j| (c.kappa * ((j as f64 * h).cos() - 1.0)).exp())
                    .sum::<f64>()
                    * h;
                (c, z)
            })
            .collect();
        Ok(Self { components })
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.components
            .iter()
            .map(|(c, z)| c.weight * (c.kappa * ((theta - c.mu).cos() - 1.0)).exp() / z)
            .sum()
    }

    /// `E[d(X, m)^(2·power)]` by composite Simpson over offsets `u ∈ [−π, π]`
    /// from `m`, where `d = |u|` is smooth.
    pub fn distance_moment(&self, m: f64, power: i32) -> f64 {
        const N: usize = 4096;
        let h = TAU / N as f64;
        let mut acc = 0.0;
        for j in 0..=N {
            let u = -PI + j as f64 * h;
            let w = if j == 0 || j == N {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * (u * u).powi(power) * self.eval(m + u);
        }
        acc * h / 3.0
    }
}

/// Population Fréchet mean, variance `E d(X, μ)²` and `Var d(X, μ)²` of a
/// circular law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleMoments {
    pub mean: f64,
    pub variance: f64,
    pub sq_distance_variance: f64,
}

/// Minimize the population Fréchet function over a coarse grid, then refine
/// the best cell by golden-section search.
pub fn circle_population_moments(spec: &DistributionSpec) -> Result<CircleMoments> {
    let density = CircleDensity::new(spec)?;
    let f = |m: f64| density.distance_moment(m, 1);

    const COARSE: usize = 720;
    let step = TAU / COARSE as f64;
    let (best, _) = (0..COARSE)
        .map(|i| (i as f64 * step, f(i as f64 * step)))
        .fold(
            (0.0, f64::INFINITY),
            |acc, c| if c.1 < acc.1 { c } else { acc },
        );

    let (mut lo, mut hi) = (best - step, best + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > 1e-9 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    let mean = wrap_angle(0.5 * (lo + hi));
    let variance = f(mean);
    let second = density.distance_moment(mean, 2);
    Ok(CircleMoments {
        mean,
        variance,
        sq_distance_variance: second - variance * variance,
    })
}

/// Population Fréchet mean of a booklet hierarchical law.
///
/// The page coordinate is the page mean. On branch `z` the spine objective is
/// a quadratic with minimizer `w_z m_z − Σ_{j≠z} w_j m_j` (with `m_j` the
/// Beta means), clamped at the spine; at most one branch can be positive.
pub fn booklet_population_mean(spec: &DistributionSpec) -> Result<BookletPoint> {
    let DistributionSpec::BookletHierarchical {
        weights,
        spine_laws,
        page_mean,
        page_dim,
        ..
    } = spec
    else {
        return Err(Error::Unsupported(
            "population mean of a non-booklet law".into(),
        ));
    };
    spec.validate()?;
    let contrib: Vec<f64> = weights
        .iter()
        .zip(spine_laws)
        .map(|(w, (a, b))| w * a / (a + b))
        .collect();
    let total: f64 = contrib.iter().sum();
    let page = vec![*page_mean; *page_dim];
    for (z, c) in contrib.iter().enumerate() {
        let a = c - (total - c);
        if a > 0.0 {
            return BookletPoint::new(z + 1, a, page);
        }
    }
    Ok(BookletPoint::origin(page))
}
