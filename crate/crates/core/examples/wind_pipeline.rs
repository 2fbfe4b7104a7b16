//! End-to-end directional analysis: write a synthetic noon wind record,
//! ingest it back with time filters, and build a confidence set for the
//! mean direction by inverting the test.
//!
//! cargo run --release --example wind_pipeline

use chrono::{Duration, NaiveDate};
use isomet::geometry::{CirclePoint, Point, Space};
use isomet::inference::{invert_test, score_test_circle};
use isomet::io::{ingest_angles, write_angles, AngleRecord, IngestOptions};
use isomet::rng::Streams;
use isomet::sampling::{sample, DistributionSpec};

fn main() -> isomet::Result<()> {
    // Hourly observations for 152 days; only the 12:00 ones are kept below.
    let spec = DistributionSpec::von_mises(225f64.to_radians(), 2.0)?;
    let start = NaiveDate::from_ymd_opt(2024, 5, 1)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap();
    let hours = 152 * 24;
    let draws = sample(&spec, hours, &mut Streams::new(2024).stream(&[0]))?;
    let records: Vec<AngleRecord> = draws
        .iter()
        .enumerate()
        .map(|(h, p)| AngleRecord {
            timestamp: Some(
                (start + Duration::hours(h as i64))
                    .format("%Y-%m-%dT%H:%M:%S")
                    .to_string(),
            ),
            direction_degrees: p.as_circle().unwrap().degrees(),
        })
        .collect();
    let dir = std::env::temp_dir().join("isomet-wind-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("wind.csv");
    write_angles(std::fs::File::create(&path)?, &records)?;

    let options = IngestOptions {
        hour: Some(12),
        ..Default::default()
    };
    let data = ingest_angles(&path, &options)?;
    println!(
        "{} noon observations ({} rows filtered out)",
        data.records.len(),
        data.skipped
    );

    let grid: Vec<Point> = (0..360)
        .map(|d| Point::angle(f64::from(d).to_radians()))
        .collect();
    let set = invert_test(&data.points(), &Space::circle(), &grid, 499, 0.05, 9)?;
    println!("95% confidence set for the mean direction:");
    for arc in &set.intervals {
        println!("  [{:.0}°, {:.0}°]", arc.start_degrees(), arc.end_degrees());
    }
    // The arc around 225° comes with a copy around its antipode, because the
    // reflection about a direction also fixes the opposite direction.

    let score = score_test_circle(
        &data.circle_points(),
        CirclePoint::from_degrees(225.0),
        0.05,
    )?;
    println!(
        "score test at 225°: T = {:.4}, p = {:.4}",
        score.statistic, score.p_value
    );
    Ok(())
}
