//! Brute-force grid oracles for the Fréchet mean estimators, shared by the
//! oracle suite and the acceptance run.

#![allow(dead_code)]

use std::f64::consts::PI;

use isomet::frechet::{bw_mean, frechet_mean_oracle, BwMeanOptions};
use isomet::geometry::{Matrix, Point, Space, SpdMatrix};
use isomet::rng::Streams;
use isomet::{frechet_mean, frechet_objective};
use rand::Rng;
use rand_distr::{Distribution, Normal};

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
    ($cond:expr) => {
        let ok: bool = $cond;
        if !ok {
            return Err(stringify!($cond).to_string());
        }
    };
}

/// Minimize `f` over a box by repeated grid refinement around the best node.
/// Returns the best node and the final grid spacing per coordinate.
fn refine_grid(
    lo: &[f64],
    hi: &[f64],
    nodes: usize,
    levels: usize,
    f: impl Fn(&[f64]) -> Option<f64>,
) -> (Vec<f64>, Vec<f64>) {
    let d = lo.len();
    let (lo0, hi0) = (lo, hi);
    let mut lo = lo.to_vec();
    let mut hi = hi.to_vec();
    let mut best = lo.clone();
    let mut step = vec![0.0; d];
    for _ in 0..levels {
        for k in 0..d {
            step[k] = (hi[k] - lo[k]) / (nodes - 1) as f64;
        }
        let mut best_val = f64::INFINITY;
        let mut idx = vec![0usize; d];
        loop {
            let x: Vec<f64> = (0..d).map(|k| lo[k] + step[k] * idx[k] as f64).collect();
            if let Some(v) = f(&x) {
                if v < best_val {
                    best_val = v;
                    best = x;
                }
            }
            let mut k = 0;
            while k < d {
                idx[k] += 1;
                if idx[k] < nodes {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == d {
                break;
            }
        }
        // Keep a margin of three cells so that elongated valleys are not lost.
        for k in 0..d {
            lo[k] = (best[k] - 3.0 * step[k]).max(lo0[k]);
            hi[k] = (best[k] + 3.0 * step[k]).min(hi0[k]);
        }
    }
    (best, step)
}

pub fn circle_enumeration_matches_grid(seed: u64, samples: u64) -> Check {
    let space = Space::circle();
    let grid: Vec<Point> = (0..36_000)
        .map(|j| Point::angle(j as f64 * 2.0 * PI / 36_000.0))
        .collect();
    let h = 2.0 * PI / 36_000.0;
    let streams = Streams::new(seed);
    for s in 0..samples {
        let mut rng = streams.stream(&[s]);
        let n = rng.random_range(2..9);
        let center = rng.random_range(0.0..2.0 * PI);
        let sample: Vec<Point> = (0..n)
            .map(|_| Point::angle(center + rng.random_range(-2.0..2.0)))
            .collect();
        let est = match frechet_mean(&space, &sample) {
            Ok(e) => e,
            Err(isomet::Error::NonUniqueMean { .. }) => continue,
            Err(e) => return Err(format!("sample {s}: {e}")),
        };
        let oracle = frechet_mean_oracle(&space, &sample, &grid).unwrap();
        let f_est = frechet_objective(&space, &sample, &est.mean).unwrap();
        let f_oracle = frechet_objective(&space, &sample, &oracle).unwrap();
        ensure!(
            f_est <= f_oracle + 1e-12,
            "sample {s}: {f_est} > {f_oracle}"
        );
        let d = space.distance(&est.mean, &oracle).unwrap();
        ensure!(
            d <= h,
            "sample {s}: estimate {:?} vs grid {:?}",
            est.mean,
            oracle
        );
    }
    Ok(())
}

pub fn euclidean_mean_matches_grid(seed: u64, samples: u64) -> Check {
    let space = Space::euclidean(2).unwrap();
    let streams = Streams::new(seed);
    for s in 0..samples {
        let mut rng = streams.stream(&[s]);
        let n = rng.random_range(1..9);
        let sample: Vec<Point> = (0..n)
            .map(|_| {
                Point::vector(vec![
                    rng.random_range(-5.0..5.0),
                    rng.random_range(-5.0..5.0),
                ])
                .unwrap()
            })
            .collect();
        let est = frechet_mean(&space, &sample).unwrap();
        let (best, step) = refine_grid(&[-5.0, -5.0], &[5.0, 5.0], 41, 5, |x| {
            frechet_objective(&space, &sample, &Point::vector(x.to_vec()).unwrap()).ok()
        });
        let oracle = Point::vector(best).unwrap();
        ensure!(space.distance(&est.mean, &oracle).unwrap() <= step[0] * 2f64.sqrt());
    }
    Ok(())
}

fn random_spd<R: Rng>(rng: &mut R) -> Matrix {
    let l = Matrix::from_row_major(
        2,
        &[
            rng.random_range(0.3..2.0),
            0.0,
            rng.random_range(-1.0..1.0),
            rng.random_range(0.3..2.0),
        ],
    )
    .unwrap();
    l.matmul(&l.transpose()).symmetrized()
}

pub fn bw_fixed_point_matches_grid(seed: u64, samples: u64) -> Check {
    let space = Space::bures_wasserstein(2).unwrap();
    let streams = Streams::new(seed);
    for s in 0..samples {
        let mut rng = streams.stream(&[s]);
        let n = rng.random_range(2..7);
        let sample: Vec<Point> = (0..n)
            .map(|_| Point::spd(random_spd(&mut rng)).unwrap())
            .collect();
        let est = frechet_mean(&space, &sample).unwrap();

        // The barycenter need not lie in the entrywise hull of the sample, so
        // search every SPD matrix whose diagonal is bounded by the largest
        // sample diagonal entry.
        let top = sample
            .iter()
            .map(|p| {
                let m = p.as_spd().unwrap().matrix();
                m.get(0, 0).max(m.get(1, 1))
            })
            .fold(0.0, f64::max)
            + 0.5;
        let (lo, hi) = ([1e-3, -top, 1e-3], [top, top, top]);
        let (best, _) = refine_grid(&lo, &hi, 15, 16, |x| {
            let m = Matrix::from_rows(&[&[x[0], x[1]], &[x[1], x[2]]]).ok()?;
            let p = Point::spd(m).ok()?;
            frechet_objective(&space, &sample, &p).ok()
        });
        let oracle =
            Point::spd(Matrix::from_rows(&[&[best[0], best[1]], &[best[1], best[2]]]).unwrap())
                .unwrap();
        let f_est = frechet_objective(&space, &sample, &est.mean).unwrap();
        let f_oracle = frechet_objective(&space, &sample, &oracle).unwrap();
        ensure!(
            f_est <= f_oracle + 1e-10,
            "sample {s}: {f_est} > {f_oracle}"
        );
        let d = space.distance(&est.mean, &oracle).unwrap();
        ensure!(d < 1e-3, "sample {s}: distance {d} to the grid minimizer");
    }
    Ok(())
}

pub fn bw_fixed_point_objective_is_monotone(seed: u64, samples: u64) -> Check {
    let space = Space::bures_wasserstein(3).unwrap();
    let streams = Streams::new(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    for s in 0..samples {
        let mut rng = streams.stream(&[s]);
        let n = rng.random_range(2..10);
        let sample: Vec<SpdMatrix> = (0..n)
            .map(|_| {
                let v: Vec<f64> = (0..9).map(|_| normal.sample(&mut rng)).collect();
                let l = Matrix::from_row_major(3, &v).unwrap();
                SpdMatrix::new(l.matmul(&l.transpose()).add_identity(0.05).symmetrized()).unwrap()
            })
            .collect();
        let points: Vec<Point> = sample.iter().cloned().map(Point::Spd).collect();
        let refs: Vec<&SpdMatrix> = sample.iter().collect();
        let mut values = Vec::new();
        let (_, _, converged) = bw_mean(&refs, BwMeanOptions::default(), |it| {
            values.push(frechet_objective(&space, &points, &Point::Spd(it.clone())).unwrap());
        })
        .unwrap();
        ensure!(converged, "sample {s} did not converge");
        for w in values.windows(2) {
            ensure!(
                w[1] <= w[0] * (1.0 + 1e-10) + 1e-12,
                "sample {s}: objective rose {} -> {}",
                w[0],
                w[1]
            );
        }
    }
    Ok(())
}

fn booklet_oracle(space: &Space, sample: &[Point], branches: usize, page: usize) -> (Point, f64) {
    let pts: Vec<_> = sample.iter().map(|p| p.as_booklet().unwrap()).collect();
    let xmax = pts.iter().map(|b| b.spine()).fold(0.0, f64::max) + 0.1;
    let (ylo, yhi) = if page == 0 {
        (vec![], vec![])
    } else {
        let ys = pts.iter().map(|b| b.page()[0]);
        (
            vec![ys.clone().fold(f64::INFINITY, f64::min) - 0.1],
            vec![ys.fold(f64::NEG_INFINITY, f64::max) + 0.1],
        )
    };
    let mut best: Option<(Point, f64, f64)> = None;
    for z in 1..=branches {
        let lo: Vec<f64> = [vec![0.0], ylo.clone()].concat();
        let hi: Vec<f64> = [vec![xmax], yhi.clone()].concat();
        let eval = |x: &[f64]| {
            let p = Point::booklet(z, x[0].max(0.0), x[1..].to_vec()).ok()?;
            frechet_objective(space, sample, &p).ok()
        };
        let (node, step) = refine_grid(&lo, &hi, 41, 6, eval);
        let p = Point::booklet(z, node[0].max(0.0), node[1..].to_vec()).unwrap();
        let v = frechet_objective(space, sample, &p).unwrap();
        if best.as_ref().is_none_or(|b| v < b.1) {
            best = Some((p, v, step.iter().fold(0.0f64, |a, s| a.max(*s))));
        }
    }
    let (p, _, h) = best.unwrap();
    (p, h)
}

pub fn booklet_closed_form_matches_grid(
    branches: usize,
    page: usize,
    seed: u64,
    samples: u64,
) -> Check {
    let space = Space::booklet(branches, page + 1).unwrap();
    let streams = Streams::new(seed);
    for s in 0..samples {
        let mut rng = streams.stream(&[s]);
        let n = rng.random_range(2..9);
        let sample: Vec<Point> = (0..n)
            .map(|_| {
                let y: Vec<f64> = (0..page).map(|_| rng.random_range(-1.0..1.0)).collect();
                Point::booklet(
                    rng.random_range(1..=branches),
                    rng.random_range(0.0..1.0),
                    y,
                )
                .unwrap()
            })
            .collect();
        let est = frechet_mean(&space, &sample).unwrap();
        let (oracle, h) = booklet_oracle(&space, &sample, branches, page);
        let f_est = frechet_objective(&space, &sample, &est.mean).unwrap();
        let f_oracle = frechet_objective(&space, &sample, &oracle).unwrap();
        ensure!(
            f_est <= f_oracle + 1e-12,
            "sample {s}: {f_est} > {f_oracle}"
        );
        let d = space.distance(&est.mean, &oracle).unwrap();
        ensure!(
            d <= 2.0 * h,
            "sample {s}: {:?} vs grid {:?}",
            est.mean,
            oracle
        );
    }
    Ok(())
}
