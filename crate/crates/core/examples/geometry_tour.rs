//! Distances, exponential/log maps and geodesics in each supported space.
//!
//! cargo run --example geometry_tour

use isomet::geometry::{Matrix, Point, Space, Tangent};

fn main() -> isomet::Result<()> {
    // Circle: angles in radians, distances along the shorter arc.
    let circle = Space::circle();
    let a = Point::angle(0.1);
    let b = Point::angle(6.0);
    println!("circle  d(0.1, 6.0) = {:.4}", circle.distance(&a, &b)?);
    let v = circle.log(&a, &b)?;
    println!("circle  log_0.1(6.0) = {v:?}");
    println!("circle  midpoint = {:?}", circle.geodesic(&a, &b, 0.5)?);

    // Bures-Wasserstein on 2x2 SPD matrices.
    let bw = Space::bures_wasserstein(2)?;
    let i = Point::spd(Matrix::identity(2))?;
    let s = Point::spd(Matrix::from_rows(&[&[4.0, 1.0], &[1.0, 3.0]])?)?;
    println!("bw      d(I, S) = {:.6}", bw.distance(&i, &s)?);
    // Commuting matrices: the distance is the Euclidean distance of the square roots.
    let d4 = Point::spd(Matrix::from_diagonal(&[4.0, 9.0]))?;
    println!(
        "bw      d(I, diag(4, 9)) = {:.6} (expect {:.6})",
        bw.distance(&i, &d4)?,
        5f64.sqrt()
    );
    let half = bw.geodesic(&i, &s, 0.5)?;
    println!(
        "bw      d(I, γ(1/2)) / d(I, S) = {:.6}",
        bw.distance(&i, &half)? / bw.distance(&i, &s)?
    );
    let Tangent::Symmetric(log) = bw.log(&i, &s)? else {
        unreachable!()
    };
    println!("bw      log_I(S) = {:?}", log.as_slice());

    // Booklet with 4 branches and a one-dimensional page: cross-branch paths
    // pass through the spine.
    let book = Space::booklet(4, 2)?;
    let p = Point::booklet(1, 0.5, vec![0.0])?;
    let q = Point::booklet(2, 0.5, vec![1.0])?;
    println!(
        "booklet d((1,.5,0), (2,.5,1)) = {:.6}",
        book.distance(&p, &q)?
    );
    println!("booklet midpoint = {:?}", book.geodesic(&p, &q, 0.5)?);

    // Euclidean for reference.
    let e = Space::euclidean(2)?;
    let x = Point::vector(vec![0.0, 0.0])?;
    let y = Point::vector(vec![3.0, 4.0])?;
    println!("R^2     d = {}", e.distance(&x, &y)?);
    Ok(())
}
