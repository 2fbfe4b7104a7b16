//! Monte Carlo sweeps of rejection rates over sample sizes and alternatives.
//!
//! Every dataset is reproducible on its own: its data stream and test seed
//! derive from `(master seed, scenario, n index, δ index, dataset index)`, so
//! tables do not depend on thread count or scheduling.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::geometry::booklet;
use crate::geometry::{BookletPoint, Matrix, Point, Space, SpdMatrix};
use crate::inference::{isotropic_test, TestConfig};
use crate::rng::Streams;
use crate::sampling::{
    booklet_population_mean, circle_population_moments, sample, shift_spec, DistributionSpec,
};

/// Largest tolerated fraction of failed datasets in one cell.
pub const MAX_ERROR_RATE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Von Mises data rotated by δ, null at the unrotated center.
    CircleVm,
    /// Two-component von Mises mixture rotated by δ, null at the population
    /// Fréchet mean of the unrotated mixture.
    CircleMixture,
    /// Tangent-Gaussian SPD matrices centered along the geodesic from the
    /// identity toward `[[4,1],[1,3]]`, null at the identity.
    BwTangent,
    /// Fixed booklet model; the null moves from the true mean toward `(2, 1, 0)`.
    BookletModel,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::CircleVm,
        Scenario::CircleMixture,
        Scenario::BwTangent,
        Scenario::BookletModel,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::CircleVm => "circle-vm",
            Scenario::CircleMixture => "circle-mixture",
            Scenario::BwTangent => "bw",
            Scenario::BookletModel => "booklet",
        }
    }

    fn id(&self) -> u64 {
        match self {
            Scenario::CircleVm => 0,
            Scenario::CircleMixture => 1,
            Scenario::BwTangent => 2,
            Scenario::BookletModel => 3,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown scenario {s:?}; expected one of circle-vm, circle-mixture, bw, booklet"
                ))
            })
    }
}

/// Scenario constants. The defaults reproduce the published designs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioParams {
    /// Center of the von Mises scenario (radians).
    pub vm_center: f64,
    /// Concentration of the von Mises scenario.
    pub vm_kappa: f64,
    /// Weight of the component at 0 in the mixture scenario.
    pub mixture_p: f64,
    /// Concentration of both mixture components.
    pub mixture_kappa: f64,
    /// Geodesic target for the Bures-Wasserstein scenario.
    pub bw_target: [[f64; 2]; 2],
    /// Restrict Bures-Wasserstein tangent draws to the injectivity domain.
    pub bw_truncate: bool,
    /// Geodesic target `(branch, spine, page)` for the booklet scenario.
    pub booklet_target: (usize, f64, f64),
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            vm_center: 0.0,
            vm_kappa: 1.0,
            mixture_p: 1.0 / 3.0,
            mixture_kappa: 1.0,
            bw_target: [[4.0, 1.0], [1.0, 3.0]],
            bw_truncate: true,
            booklet_target: (2, 1.0, 0.0),
        }
    }
}

/// How alternatives are chosen for each sample size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DeltaRule {
    /// The same list of shifts for every `n`.
    Grid(Vec<f64>),
    /// One local alternative per `n`: `δ_n = c / √n`.
    Local { c: f64 },
}

impl DeltaRule {
    fn deltas(&self, n: usize) -> Vec<f64> {
        match self {
            DeltaRule::Grid(d) => d.clone(),
            DeltaRule::Local { c } => vec![c / (n as f64).sqrt()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub scenario: Scenario,
    pub sample_sizes: Vec<usize>,
    pub deltas: DeltaRule,
    pub datasets: usize,
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub threads: Option<usize>,
    pub params: ScenarioParams,
}

impl SweepConfig {
    pub fn new(scenario: Scenario, sample_sizes: Vec<usize>, deltas: DeltaRule) -> Self {
        Self {
            scenario,
            sample_sizes,
            deltas,
            datasets: 500,
            replicates: 1000,
            alpha: 0.05,
            seed: 0,
            threads: None,
            params: ScenarioParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_sizes.is_empty() {
            return Err(Error::InvalidParameter("empty sample-size list".into()));
        }
        if let Some(&n) = self.sample_sizes.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidParameter(format!(
                "sample size {n} is below 2"
            )));
        }
        if self.datasets == 0 || self.replicates == 0 {
            return Err(Error::InvalidParameter(
                "datasets and replicates must be positive".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha {} outside (0, 1)",
                self.alpha
            )));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidParameter("threads must be positive".into()));
        }
        match &self.deltas {
            DeltaRule::Grid(d) if d.is_empty() => {
                Err(Error::InvalidParameter("empty delta grid".into()))
            }
            DeltaRule::Grid(d) if d.iter().any(|x| !x.is_finite()) => {
                Err(Error::InvalidParameter("non-finite delta".into()))
            }
            DeltaRule::Local { c } if !c.is_finite() => {
                Err(Error::InvalidParameter("non-finite local constant".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub scenario: Scenario,
    pub n: usize,
    pub delta: f64,
    pub rejection_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// Datasets whose test completed.
    pub datasets: usize,
    pub wall_seconds: f64,
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, trials: usize, level: f64) -> Result<(f64, f64)> {
    if trials == 0 || successes > trials {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= successes <= trials, trials >= 1 (got {successes}/{trials})"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!("confidence level {level}")));
    }
    let z = Normal::standard().inverse_cdf(1.0 - (1.0 - level) / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if successes == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let high = if successes == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    Ok((low, high))
}

/// Data law and null hypothesis of one sweep cell.
#[derive(Debug, Clone)]
pub struct Cell {
    pub space: Space,
    pub spec: DistributionSpec,
    pub null: Point,
}

/// Null-hypothesis anchor and data law shared by all cells of a scenario.
#[derive(Debug, Clone)]
pub struct ScenarioSetup {
    scenario: Scenario,
    base: DistributionSpec,
    space: Space,
    /// The data law's population Fréchet mean at δ = 0.
    true_mean: Point,
    target: Point,
}

impl ScenarioSetup {
    pub fn new(scenario: Scenario, params: &ScenarioParams) -> Result<Self> {
        let (base, true_mean, target) = match scenario {
            Scenario::CircleVm => {
                let spec = DistributionSpec::von_mises(params.vm_center, params.vm_kappa)?;
                (
                    spec,
                    Point::angle(params.vm_center),
                    Point::angle(params.vm_center),
                )
            }
            Scenario::CircleMixture => {
                let spec = DistributionSpec::two_component_mixture(
                    params.mixture_p,
                    params.mixture_kappa,
                )?;
                let m = circle_population_moments(&spec)?.mean;
                (spec, Point::angle(m), Point::angle(m))
            }
            Scenario::BwTangent => {
                let rows: Vec<&[f64]> = params.bw_target.iter().map(|r| r.as_slice()).collect();
                let target = Point::spd(Matrix::from_rows(&rows)?)?;
                let spec = DistributionSpec::BwTangentGaussian {
                    center: SpdMatrix::identity(2),
                    truncate: params.bw_truncate,
                };
                (spec, Point::Spd(SpdMatrix::identity(2)), target)
            }
            Scenario::BookletModel => {
                let spec = DistributionSpec::booklet_model();
                let m = booklet_population_mean(&spec)?;
                let (z, x, y) = params.booklet_target;
                (spec, Point::Booklet(m), Point::booklet(z, x, vec![y])?)
            }
        };
        let space = base.space();
        space.check(&target)?;
        Ok(Self {
            scenario,
            base,
            space,
            true_mean,
            target,
        })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    /// Population Fréchet mean of the unshifted data law.
    pub fn true_mean(&self) -> &Point {
        &self.true_mean
    }

    /// Data law and null for shift `delta`.
    pub fn cell(&self, delta: f64) -> Result<Cell> {
        let (spec, null) = match self.scenario {
            Scenario::CircleVm | Scenario::CircleMixture => (
                shift_spec(&self.base, &self.space, delta, None)?,
                self.true_mean.clone(),
            ),
            Scenario::BwTangent => (
                shift_spec(&self.base, &self.space, delta, Some(&self.target))?,
                self.true_mean.clone(),
            ),
            Scenario::BookletModel => {
                let (Point::Booklet(a), Point::Booklet(b)) = (&self.true_mean, &self.target) else {
                    unreachable!("booklet scenario holds booklet points")
                };
                let null: BookletPoint = booklet::geodesic(a, b, delta)?;
                (self.base.clone(), Point::Booklet(null))
            }
        };
        Ok(Cell {
            space: self.space.clone(),
            spec,
            null,
        })
    }
}

struct CellOutcome {
    rejections: usize,
    completed: usize,
    errors: usize,
}

fn run_cell(cell: &Cell, config: &SweepConfig, n: usize, path: [u64; 3]) -> Result<CellOutcome> {
    let streams = Streams::new(config.seed);
    let outcomes: Vec<Result<bool>> = (0..config.datasets as u64)
        .into_par_iter()
        .map(|ds| {
            let mut rng = streams.stream(&[path[0], path[1], path[2], ds, 0]);
            let data = sample(&cell.spec, n, &mut rng)?;
            let test_seed = streams.derive_seed(&[path[0], path[1], path[2], ds, 1]);
            let tc = TestConfig::new(
                cell.space.clone(),
                cell.null.clone(),
                config.replicates,
                config.alpha,
                test_seed,
            )?;
            Ok(isotropic_test(&data, &tc)?.reject)
        })
        .collect();
    let mut out = CellOutcome {
        rejections: 0,
        completed: 0,
        errors: 0,
    };
    for o in outcomes {
        match o {
            Ok(r) => {
                out.completed += 1;
                out.rejections += usize::from(r);
            }
            Err(_) => out.errors += 1,
        }
    }
    Ok(out)
}

fn sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let setup = ScenarioSetup::new(config.scenario, &config.params)?;
    let mut rows = Vec::new();
    for (ni, &n) in config.sample_sizes.iter().enumerate() {
        for (di, delta) in config.deltas.deltas(n).into_iter().enumerate() {
            let start = Instant::now();
            let cell = setup.cell(delta)?;
            let path = [config.scenario.id(), ni as u64, di as u64];
            let out = run_cell(&cell, config, n, path)?;
            if out.errors as f64 > MAX_ERROR_RATE * config.datasets as f64 || out.completed == 0 {
                return Err(Error::CellFailed {
                    n,
                    delta,
                    errors: out.errors,
                    datasets: config.datasets,
                });
            }
            let (wilson_low, wilson_high) = wilson_interval(out.rejections, out.completed, 0.95)?;
            rows.push(SweepRow {
                scenario: config.scenario,
                n,
                delta,
                rejection_rate: out.rejections as f64 / out.completed as f64,
                wilson_low,
                wilson_high,
                datasets: out.completed,
                wall_seconds: start.elapsed().as_secs_f64(),
            });
        }
    }
    rows.sort_by(|a, b| {
        (a.scenario, a.n)
            .cmp(&(b.scenario, b.n))
            .then(a.delta.total_cmp(&b.delta))
    });
    Ok(rows)
}

/// Rejection rate and Wilson interval for every `(n, δ)` cell.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(|| sweep(config)),
        None => sweep(config),
    }
}

/// One row per sample size at the local alternative `δ_n = c / √n`.
pub fn run_local_power(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    if !matches!(config.deltas, DeltaRule::Local { .. }) {
        return Err(Error::InvalidParameter(
            "local power needs a c / sqrt(n) rule".into(),
        ));
    }
    run_sweep(config)
}
