//! Dataset ingestion, point encodings and result persistence.
//!
//! Text encodings of points:
//!
//! | space     | example           |
//! |-----------|-------------------|
//! | circle    | `225deg`, `3.93rad` |
//! | BW        | `2,0.5;0.5,1` (rows separated by `;`) |
//! | booklet   | `2:0.7:0.1,0.2` (`branch:spine:page`) |
//! | Euclidean | `1,2.5` |

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, NaiveDateTime, Timelike, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{BookletPoint, CirclePoint, Matrix, Point, Space};
use crate::harness::SweepRow;
use crate::inference::ConfidenceSet;

pub const SWEEP_HEADER: [&str; 8] = [
    "scenario",
    "n",
    "delta",
    "rejection_rate",
    "wilson_low",
    "wilson_high",
    "datasets",
    "wall_seconds",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngleUnit {
    #[default]
    Degrees,
    Radians,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOptions {
    pub column: String,
    /// Timestamp column; absent columns simply yield records without time.
    pub time_column: String,
    pub unit: AngleUnit,
    /// Keep only observations taken at this hour of the day.
    pub hour: Option<u32>,
    /// Inclusive date range.
    pub from: Option<NaiveDate>,
    pub to: Option<NaiveDate>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            column: "direction".into(),
            time_column: "timestamp".into(),
            unit: AngleUnit::Degrees,
            hour: None,
            from: None,
            to: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleRecord {
    pub timestamp: Option<String>,
    /// Degrees from North in `[0, 360)`.
    pub direction_degrees: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngularDataset {
    pub records: Vec<AngleRecord>,
    pub source: PathBuf,
    /// Rows dropped for unparsable values or failed filters.
    pub skipped: usize,
}

impl AngularDataset {
    pub fn points(&self) -> Vec<Point> {
        self.records
            .iter()
            .map(|r| Point::Circle(CirclePoint::from_degrees(r.direction_degrees)))
            .collect()
    }

    pub fn circle_points(&self) -> Vec<CirclePoint> {
        self.records
            .iter()
            .map(|r| CirclePoint::from_degrees(r.direction_degrees))
            .collect()
    }
}

/// Reduce degrees into `[0, 360)`.
pub fn normalize_degrees(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.naive_utc());
    }
    for fmt in [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(dt);
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

/// Read a directional dataset from a CSV file with a header row.
pub fn ingest_angles(path: &Path, options: &IngestOptions) -> Result<AngularDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(open(path)?);
    let headers = reader.headers()?.clone();
    let col = column_index(&headers, &options.column).ok_or_else(|| {
        Error::Parse(format!(
            "{}: no column named {:?} (have {:?})",
            path.display(),
            options.column,
            headers.iter().collect::<Vec<_>>()
        ))
    })?;
    let time_col = column_index(&headers, &options.time_column);
    let filtering = options.hour.is_some() || options.from.is_some() || options.to.is_some();
    if filtering && time_col.is_none() {
        return Err(Error::Parse(format!(
            "{}: time filters need a {:?} column",
            path.display(),
            options.time_column
        )));
    }

    let mut records = Vec::new();
    let mut skipped = 0;
    for row in reader.records() {
        let Ok(row) = row else {
            skipped += 1;
            continue;
        };
        let value = row.get(col).and_then(|v| v.trim().parse::<f64>().ok());
        let Some(value) = value.filter(|v| v.is_finite()) else {
            skipped += 1;
            continue;
        };
        let timestamp = time_col
            .and_then(|i| row.get(i))
            .map(|s| s.trim().to_string());
        if filtering {
            let Some(ts) = timestamp.as_deref().and_then(parse_timestamp) else {
                skipped += 1;
                continue;
            };
            let keep = options.hour.is_none_or(|h| ts.hour() == h)
                && options.from.is_none_or(|d| ts.date() >= d)
                && options.to.is_none_or(|d| ts.date() <= d);
            if !keep {
                skipped += 1;
                continue;
            }
        }
        let degrees = match options.unit {
            AngleUnit::Degrees => value,
            AngleUnit::Radians => value.to_degrees(),
        };
        records.push(AngleRecord {
            timestamp: timestamp.filter(|s| !s.is_empty()),
            direction_degrees: normalize_degrees(degrees),
        });
    }
    if records.is_empty() {
        return Err(Error::Empty("no valid rows in the angular dataset"));
    }
    Ok(AngularDataset {
        records,
        source: path.to_path_buf(),
        skipped,
    })
}

/// Write records as `timestamp,direction`.
pub fn write_angles<W: Write>(w: W, records: &[AngleRecord]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["timestamp", "direction"])?;
    for r in records {
        let deg = r.direction_degrees.to_string();
        wr.write_record([r.timestamp.as_deref().unwrap_or(""), deg.as_str()])?;
    }
    wr.flush()?;
    Ok(())
}

/// Read one encoded point per row from `column`.
pub fn read_points(path: &Path, column: &str, space: &Space) -> Result<Vec<Point>> {
    let mut reader = csv::Reader::from_reader(open(path)?);
    let headers = reader.headers()?.clone();
    let col = column_index(&headers, column)
        .ok_or_else(|| Error::Parse(format!("{}: no column named {column:?}", path.display())))?;
    let mut points = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let field = row
            .get(col)
            .ok_or_else(|| Error::Parse(format!("row {}: missing field", i + 1)))?;
        let p =
            parse_point(space, field).map_err(|e| Error::Parse(format!("row {}: {e}", i + 1)))?;
        points.push(p);
    }
    if points.is_empty() {
        return Err(Error::Empty("no points in input"));
    }
    Ok(points)
}

fn parse_f64(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("not a finite number: {s:?}")));
    }
    Ok(v)
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_f64).collect()
}

fn join(v: &[f64], sep: &str) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(sep)
}

/// Parse the text encoding of a point in `space`.
pub fn parse_point(space: &Space, s: &str) -> Result<Point> {
    let s = s.trim();
    let p = match space {
        Space::Circle => {
            if let Some(v) = s.strip_suffix("deg") {
                Point::Circle(CirclePoint::new(parse_f64(v)?.to_radians())?)
            } else if let Some(v) = s.strip_suffix("rad") {
                Point::Circle(CirclePoint::new(parse_f64(v)?)?)
            } else {
                return Err(Error::Parse(format!(
                    "angle {s:?} needs a unit suffix, e.g. 225deg or 3.93rad"
                )));
            }
        }
        Space::BuresWasserstein { .. } => {
            let rows = s.split(';').map(parse_list).collect::<Result<Vec<_>>>()?;
            let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
            Point::spd(Matrix::from_rows(&refs)?)?
        }
        Space::Booklet { .. } => {
            let mut parts = s.splitn(3, ':');
            let z = parts.next().unwrap_or("");
            let x = parts
                .next()
                .ok_or_else(|| Error::Parse(format!("booklet point {s:?} is not z:x:y")))?;
            let z: usize = z
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad branch in {s:?}")))?;
            let page = parts
                .next()
                .map(parse_list)
                .transpose()?
                .unwrap_or_default();
            Point::Booklet(BookletPoint::new(z, parse_f64(x)?, page)?)
        }
        Space::Euclidean { .. } => Point::vector(parse_list(s)?)?,
    };
    space.check(&p)?;
    Ok(p)
}

/// Lossless text encoding; circle points are printed in radians.
pub fn format_point(p: &Point) -> String {
    match p {
        Point::Circle(c) => format!("{}rad", c.theta()),
        Point::Spd(m) => {
            let d = m.dim();
            m.matrix()
                .as_slice()
                .chunks(d)
                .map(|r| join(r, ","))
                .collect::<Vec<_>>()
                .join(";")
        }
        Point::Booklet(b) => {
            if b.page().is_empty() {
                format!("{}:{}", b.branch(), b.spine())
            } else {
                format!("{}:{}:{}", b.branch(), b.spine(), join(b.page(), ","))
            }
        }
        Point::Euclidean(e) => join(e.coords(), ","),
    }
}

/// Write sweep rows under the fixed header. Without `timing` the
/// `wall_seconds` column is 0 so that tables are byte-reproducible.
pub fn write_sweep_csv<W: Write>(w: W, rows: &[SweepRow], timing: bool) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(SWEEP_HEADER)?;
    for r in rows {
        let wall = if timing { r.wall_seconds } else { 0.0 };
        wr.write_record([
            r.scenario.name().to_string(),
            r.n.to_string(),
            r.delta.to_string(),
            r.rejection_rate.to_string(),
            r.wilson_low.to_string(),
            r.wilson_high.to_string(),
            r.datasets.to_string(),
            wall.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// Per-grid-point inversion results: `angle_degrees,p_value,accepted,error`.
pub fn write_inversion_csv<W: Write>(w: W, set: &ConfidenceSet) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["angle_degrees", "p_value", "accepted", "error"])?;
    for (i, p) in set.grid.iter().enumerate() {
        let angle = match p {
            Point::Circle(c) => c.degrees().to_string(),
            other => format_point(other),
        };
        wr.write_record([
            angle,
            set.p_values[i].map(|v| v.to_string()).unwrap_or_default(),
            set.accepted[i].to_string(),
            set.errors[i].clone().unwrap_or_default(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let k = f.read(&mut buf)?;
        if k == 0 {
            break;
        }
        hasher.update(&buf[..k]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Provenance of one CLI run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub flags: BTreeMap<String, serde_json::Value>,
    pub seed: u64,
    pub version: String,
    pub started_at: String,
    pub finished_at: String,
    pub wall_seconds: f64,
    /// SHA-256 of every input file, keyed by path.
    pub input_digests: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, args: Vec<String>, seed: u64) -> Self {
        Self {
            command: command.into(),
            args,
            flags: BTreeMap::new(),
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            started_at: Utc::now().to_rfc3339(),
            finished_at: String::new(),
            wall_seconds: 0.0,
            input_digests: BTreeMap::new(),
        }
    }

    pub fn flag(&mut self, name: &str, value: impl Serialize) {
        let value = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.flags.insert(name.into(), value);
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let digest = sha256_file(path)?;
        self.input_digests
            .insert(path.display().to_string(), digest);
        Ok(())
    }

    pub fn finish(&mut self, wall_seconds: f64) {
        self.finished_at = Utc::now().to_rfc3339();
        self.wall_seconds = wall_seconds;
    }

    /// Manifest path next to an output file: `<out>.manifest.json`.
    pub fn path_for(out: &Path) -> PathBuf {
        let mut s = out.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        Ok(())
    }
}
