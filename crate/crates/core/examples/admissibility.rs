//! Which points can the randomization actually move? A probe with a single
//! distinct image is fixed by every drawn map, and data concentrated there
//! carry no information about the null.
//!
//! cargo run --example admissibility

use isomet::geometry::{Point, Space};
use isomet::isotropy::RandomIsotropy;
use isomet::rng::Streams;

fn report(label: &str, r: &RandomIsotropy, probes: &[Point]) -> isomet::Result<()> {
    let mut rng = Streams::new(1).stream(&[0]);
    for (p, images) in r.probe_admissibility(probes, 200, &mut rng)? {
        println!("{label}: probe {p:?} has {images} distinct image(s)");
    }
    Ok(())
}

fn main() -> isomet::Result<()> {
    // On the circle only the center and its antipode are fixed.
    let r = RandomIsotropy::standard(Space::circle(), Point::angle(0.0))?;
    report(
        "circle",
        &r,
        &[Point::angle(std::f64::consts::PI), Point::angle(1.0)],
    )?;

    // A spider (booklet with empty page) centered on branch 1: the other
    // branches are permuted, branch 1 itself is fixed pointwise.
    let spider = Space::booklet(3, 1)?;
    let r = RandomIsotropy::standard(spider.clone(), Point::booklet(1, 0.5, vec![])?)?;
    report(
        "spider, center on a leg",
        &r,
        &[
            Point::booklet(1, 2.0, vec![])?,
            Point::booklet(2, 0.7, vec![])?,
        ],
    )?;

    // Centered at the body every leg can be swapped.
    let r = RandomIsotropy::standard(spider, Point::booklet(1, 0.0, vec![])?)?;
    report(
        "spider, center at the body",
        &r,
        &[Point::booklet(1, 2.0, vec![])?],
    )?;
    Ok(())
}
