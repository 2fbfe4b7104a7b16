//! The isotropic randomization test, confidence sets by test inversion and
//! the circular score test.
//!
//! Each observation is moved by an independent random isotropy of the
//! hypothesized mean and the Fréchet variance of the randomized sample is
//! recomputed. Under the null the randomized variances are exchangeable with
//! the observed one; away from the null randomization inflates the variance,
//! so the test rejects when the observed variance is small compared to its
//! randomized replicates.

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::frechet::frechet_mean;
use crate::geometry::circle::signed_difference;
use crate::geometry::{CirclePoint, Point, Space};
use crate::isotropy::RandomIsotropy;
use crate::rng::Streams;

/// Out-of-cone reflections tolerated for one observation before the
/// identity is used instead.
pub const MAX_REDRAWS: usize = 10;

#[derive(Debug, Clone)]
pub struct TestConfig {
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
    pub randomization: RandomIsotropy,
}

impl TestConfig {
    /// Standard randomization about `null_mean`: the reflection coin on S¹,
    /// ℝ^d and Bures-Wasserstein space, booklet maps on booklets.
    pub fn new(
        space: Space,
        null_mean: Point,
        replicates: usize,
        alpha: f64,
        seed: u64,
    ) -> Result<Self> {
        let randomization = RandomIsotropy::standard(space, null_mean)?;
        Self::with_randomization(randomization, replicates, alpha, seed)
    }

    pub fn with_randomization(
        randomization: RandomIsotropy,
        replicates: usize,
        alpha: f64,
        seed: u64,
    ) -> Result<Self> {
        if replicates == 0 {
            return Err(Error::InvalidParameter(
                "need at least one replicate".into(),
            ));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        Ok(Self {
            replicates,
            alpha,
            seed,
            randomization,
        })
    }

    pub fn space(&self) -> &Space {
        self.randomization.space()
    }

    pub fn null_mean(&self) -> &Point {
        self.randomization.center()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub observed_statistic: f64,
    pub randomized_statistics: Vec<f64>,
    pub p_value: f64,
    pub reject: bool,
    /// Randomized observations whose drawn map left the SPD cone and was redrawn.
    pub fallback_count: usize,
    /// Replicates redrawn because their Fréchet mean was not unique.
    pub degenerate_redraws: usize,
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
}

/// `(1 + #{b : V_b ≤ observed}) / (B + 1)`.
pub fn p_value_curve(randomized_statistics: &[f64], observed: f64) -> f64 {
    let below = randomized_statistics
        .iter()
        .filter(|&&v| v <= observed)
        .count();
    (1 + below) as f64 / (randomized_statistics.len() + 1) as f64
}

struct Replicate {
    statistic: f64,
    fallbacks: usize,
    redrawn: bool,
}

fn randomized_variance(
    sample: &[Point],
    config: &TestConfig,
    streams: &Streams,
    b: u64,
    attempt: u64,
) -> Result<(f64, usize)> {
    let iso = &config.randomization;
    let mut fallbacks = 0;
    let mut randomized = Vec::with_capacity(sample.len());
    for (i, x) in sample.iter().enumerate() {
        let mut rng = if attempt == 0 {
            streams.stream(&[b, i as u64])
        } else {
            streams.stream(&[b, i as u64, attempt])
        };
        let mut image = None;
        for _ in 0..MAX_REDRAWS {
            match iso.randomize(x, &mut rng) {
                Ok(p) => {
                    image = Some(p);
                    break;
                }
                Err(Error::SingularResult { .. }) => fallbacks += 1,
                Err(e) => return Err(e),
            }
        }
        randomized.push(image.unwrap_or_else(|| x.clone()));
    }
    let est = frechet_mean(iso.space(), &randomized)?;
    Ok((est.variance, fallbacks))
}

fn replicate(
    sample: &[Point],
    config: &TestConfig,
    streams: &Streams,
    b: u64,
) -> Result<Replicate> {
    match randomized_variance(sample, config, streams, b, 0) {
        Ok((statistic, fallbacks)) => Ok(Replicate {
            statistic,
            fallbacks,
            redrawn: false,
        }),
        Err(Error::NonUniqueMean { .. }) => {
            let (statistic, fallbacks) = randomized_variance(sample, config, streams, b, 1)?;
            Ok(Replicate {
                statistic,
                fallbacks,
                redrawn: true,
            })
        }
        Err(e) => Err(e),
    }
}

/// Run the isotropic randomization test of `H0: μ = config.null_mean`.
///
/// Replicate `b` draws observation `i`'s isotropy from the stream
/// `(seed, b, i)`, so results do not depend on how replicates are scheduled
/// across threads.
pub fn isotropic_test(sample: &[Point], config: &TestConfig) -> Result<TestResult> {
    if sample.len() < 2 {
        return Err(Error::InvalidParameter(
            "the test needs at least two observations".into(),
        ));
    }
    config.space().check_all(sample)?;
    let observed = frechet_mean(config.space(), sample)?.variance;
    let streams = Streams::new(config.seed);
    let reps = (0..config.replicates as u64)
        .into_par_iter()
        .map(|b| replicate(sample, config, &streams, b))
        .collect::<Result<Vec<_>>>()?;

    let fallback_count = reps.iter().map(|r| r.fallbacks).sum();
    let degenerate_redraws = reps.iter().filter(|r| r.redrawn).count();
    let randomized_statistics: Vec<f64> = reps.into_iter().map(|r| r.statistic).collect();
    let p_value = p_value_curve(&randomized_statistics, observed);
    Ok(TestResult {
        observed_statistic: observed,
        randomized_statistics,
        p_value,
        reject: p_value <= config.alpha,
        fallback_count,
        degenerate_redraws,
        replicates: config.replicates,
        alpha: config.alpha,
        seed: config.seed,
    })
}

/// A maximal run of accepted grid angles, counter-clockwise from `start` to
/// `end` (radians); `end < start` when the arc crosses 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Arc {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl Arc {
    pub fn contains(&self, theta: f64) -> bool {
        let span = (self.end - self.start).rem_euclid(std::f64::consts::TAU);
        (theta - self.start).rem_euclid(std::f64::consts::TAU) <= span
    }

    pub fn start_degrees(&self) -> f64 {
        self.start.to_degrees()
    }

    pub fn end_degrees(&self) -> f64 {
        self.end.to_degrees()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfidenceSet {
    pub grid: Vec<Point>,
    pub p_values: Vec<Option<f64>>,
    pub accepted: Vec<bool>,
    /// Error message for grid points whose test failed; those count as rejected.
    pub errors: Vec<Option<String>>,
    /// Maximal accepted arcs (circle only).
    pub intervals: Vec<Arc>,
}

/// Merge accepted grid angles into maximal arcs. Neighbours are consecutive
/// angles in sorted order, with the largest and smallest angles adjacent
/// across 0.
pub fn merge_arcs(angles: &[f64], accepted: &[bool]) -> Vec<Arc> {
    let mut order: Vec<usize> = (0..angles.len()).collect();
    order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]));
    let mut arcs: Vec<Arc> = Vec::new();
    let mut current: Option<Arc> = None;
    for &i in &order {
        if accepted[i] {
            let a = current.get_or_insert(Arc {
                start: angles[i],
                end: angles[i],
                points: 0,
            });
            a.end = angles[i];
            a.points += 1;
        } else if let Some(a) = current.take() {
            arcs.push(a);
        }
    }
    if let Some(a) = current {
        arcs.push(a);
    }
    let wraps = arcs.len() > 1 && accepted[order[0]] && accepted[*order.last().expect("non-empty")];
    if wraps {
        let last = arcs.pop().expect("non-empty");
        arcs[0].start = last.start;
        arcs[0].points += last.points;
    }
    arcs
}

/// Confidence set `{μ : the test at μ does not reject}` over `grid`.
///
/// Grid point `j` uses the seed derived from `(seed, j)`.
pub fn invert_test(
    sample: &[Point],
    space: &Space,
    grid: &[Point],
    replicates: usize,
    alpha: f64,
    seed: u64,
) -> Result<ConfidenceSet> {
    if grid.is_empty() {
        return Err(Error::Empty("inversion grid"));
    }
    space.check_all(grid)?;
    space.check_all(sample)?;
    if sample.len() < 2 || sample.iter().all(|p| p == &sample[0]) {
        return Err(Error::Degenerate(
            "all observations coincide, so every randomized mean is non-unique or trivial".into(),
        ));
    }
    let streams = Streams::new(seed);
    let outcomes: Vec<Result<TestResult>> = grid
        .par_iter()
        .enumerate()
        .map(|(j, mu)| {
            let config = TestConfig::new(
                space.clone(),
                mu.clone(),
                replicates,
                alpha,
                streams.derive_seed(&[j as u64]),
            )?;
            isotropic_test(sample, &config)
        })
        .collect();

    let mut p_values = Vec::with_capacity(grid.len());
    let mut accepted = Vec::with_capacity(grid.len());
    let mut errors = Vec::with_capacity(grid.len());
    for o in outcomes {
        match o {
            Ok(r) => {
                p_values.push(Some(r.p_value));
                accepted.push(!r.reject);
                errors.push(None);
            }
            Err(e) => {
                p_values.push(None);
                accepted.push(false);
                errors.push(Some(e.to_string()));
            }
        }
    }
    let intervals = if matches!(space, Space::Circle) {
        let angles: Vec<f64> = grid
            .iter()
            .map(|p| p.as_circle().expect("checked").theta())
            .collect();
        merge_arcs(&angles, &accepted)
    } else {
        Vec::new()
    };
    Ok(ConfidenceSet {
        grid: grid.to_vec(),
        p_values,
        accepted,
        errors,
        intervals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreTest {
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
}

/// Score test for a circular mean direction:
/// `T = n·(mean sin(θ_i − μ0))² / mean sin²(θ_i − μ0)`, referred to χ²₁.
pub fn score_test_circle(
    sample: &[CirclePoint],
    mu0: CirclePoint,
    alpha: f64,
) -> Result<ScoreTest> {
    if sample.len() < 2 {
        return Err(Error::InvalidParameter(
            "the score test needs at least two observations".into(),
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let n = sample.len() as f64;
    let (s, s2) = sample.iter().fold((0.0, 0.0), |(s, s2), p| {
        let v = signed_difference(mu0.theta(), p.theta()).sin();
        (s + v, s2 + v * v)
    });
    let mean_sin = s / n;
    let mean_sin_sq = s2 / n;
    if mean_sin_sq < 1e-12 {
        return Err(Error::Degenerate(
            "all observations lie on the axis of the hypothesized mean".into(),
        ));
    }
    let statistic = n * mean_sin * mean_sin / mean_sin_sq;
    let p_value = erfc((statistic / 2.0).sqrt());
    Ok(ScoreTest {
        statistic,
        p_value,
        reject: p_value <= alpha,
    })
}
