//! Sample Fréchet means and variances in each space, including the circle
//! case where the mean is not unique.
//!
//! cargo run --example frechet_means

use std::f64::consts::{FRAC_PI_2, PI};

use isomet::frechet::frechet_mean_oracle;
use isomet::geometry::{Matrix, Point, Space};
use isomet::{frechet_mean, Error};

fn main() -> isomet::Result<()> {
    let circle = Space::circle();
    let sample: Vec<Point> = [350.0f64, 10.0, 20.0, 5.0]
        .iter()
        .map(|d| Point::angle(d.to_radians()))
        .collect();
    let est = frechet_mean(&circle, &sample)?;
    let deg = est.mean.as_circle().unwrap().degrees();
    println!(
        "circle mean of 350°, 10°, 20°, 5° = {deg:.3}°, variance {:.5}",
        est.variance
    );

    // Cross-check against a brute-force grid.
    let grid: Vec<Point> = (0..3600)
        .map(|j| Point::angle(j as f64 * PI / 1800.0))
        .collect();
    let brute = frechet_mean_oracle(&circle, &sample, &grid)?;
    println!(
        "grid search agrees to {:.4}°",
        circle.distance(&brute, &est.mean)?.to_degrees()
    );

    // Two opposite points: every point on the equator between them is a mean.
    let split = vec![Point::angle(FRAC_PI_2), Point::angle(-FRAC_PI_2)];
    match frechet_mean(&circle, &split) {
        Err(Error::NonUniqueMean { gap }) => println!("±90°: mean is not unique (gap {gap:.1e})"),
        other => println!("±90°: unexpected {other:?}"),
    }

    let bw = Space::bures_wasserstein(2)?;
    let spd = vec![
        Point::spd(Matrix::from_diagonal(&[1.0, 4.0]))?,
        Point::spd(Matrix::from_diagonal(&[9.0, 1.0]))?,
        Point::spd(Matrix::from_rows(&[&[2.0, 0.5], &[0.5, 1.0]])?)?,
    ];
    let est = frechet_mean(&bw, &spd)?;
    println!(
        "bw mean = {:?} after {} objective evaluations (converged: {})",
        est.mean.as_spd().unwrap().matrix().as_slice(),
        est.objective_evaluations,
        est.converged
    );

    let book = Space::booklet(3, 2)?;
    let pts = vec![
        Point::booklet(1, 0.9, vec![0.0])?,
        Point::booklet(1, 0.7, vec![1.0])?,
        Point::booklet(2, 0.2, vec![2.0])?,
    ];
    let est = frechet_mean(&book, &pts)?;
    println!("booklet mean = {:?}", est.mean);
    Ok(())
}
