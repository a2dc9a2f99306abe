//! T-Drive style taxi logs: one `vehicle_id,YYYY-MM-DD HH:MM:SS,lon,lat`
//! record per line.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::PathBuf;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveDateTime};
use relaysched_core::model::{GpsSample, VehicleTrajectory};
use serde::{Deserialize, Serialize};

use crate::error::{io_at, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RawGpsRecord {
    pub vehicle_id: String,
    /// Naive local time as logged.
    pub timestamp: NaiveDateTime,
    pub lon: f64,
    pub lat: f64,
}

impl FromStr for RawGpsRecord {
    type Err = String;

    fn from_str(line: &str) -> Result<Self, String> {
        let fields: Vec<&str> = line.trim().split(',').map(str::trim).collect();
        let [id, ts, lon, lat] = fields[..] else {
            return Err(format!("expected 4 fields, found {}", fields.len()));
        };
        if id.is_empty() {
            return Err("empty vehicle id".into());
        }
        let timestamp =
            NaiveDateTime::parse_from_str(ts, "%Y-%m-%d %H:%M:%S").map_err(|e| format!("bad timestamp `{ts}`: {e}"))?;
        let lon: f64 = lon.parse().map_err(|_| format!("bad longitude `{lon}`"))?;
        let lat: f64 = lat.parse().map_err(|_| format!("bad latitude `{lat}`"))?;
        if !(-180.0..=180.0).contains(&lon) || !(-90.0..=90.0).contains(&lat) {
            return Err(format!("coordinates out of range: {lon}, {lat}"));
        }
        Ok(RawGpsRecord { vehicle_id: id.to_string(), timestamp, lon, lat })
    }
}

/// Latitude/longitude rectangle, bounds inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min_lat: f64,
    pub min_lon: f64,
    pub max_lat: f64,
    pub max_lon: f64,
}

impl BBox {
    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        (self.min_lat..=self.max_lat).contains(&lat) && (self.min_lon..=self.max_lon).contains(&lon)
    }

    /// Zero or negative area, or non-finite bounds.
    pub fn is_degenerate(&self) -> bool {
        !(self.min_lat < self.max_lat && self.min_lon < self.max_lon)
            || ![self.min_lat, self.min_lon, self.max_lat, self.max_lon].iter().all(|x| x.is_finite())
    }
}

impl FromStr for BBox {
    type Err = String;

    /// `min_lat,min_lon,max_lat,max_lon`
    fn from_str(s: &str) -> Result<Self, String> {
        let v: Vec<f64> = s
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad bbox coordinate `{x}`")))
            .collect::<Result<_, _>>()?;
        let [min_lat, min_lon, max_lat, max_lon] = v[..] else {
            return Err("bbox needs min_lat,min_lon,max_lat,max_lon".into());
        };
        Ok(BBox { min_lat, min_lon, max_lat, max_lon })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOptions {
    pub bbox: BBox,
    pub day: NaiveDate,
    /// Time zero of the resulting trajectories.
    pub epoch: NaiveDateTime,
    /// Fail on the first malformed line instead of skipping it.
    pub strict: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestOutcome {
    /// In order of each vehicle's first record.
    pub trajectories: Vec<VehicleTrajectory>,
    pub warnings: Vec<String>,
}

#[derive(Default)]
struct Collector {
    order: Vec<String>,
    samples: HashMap<String, Vec<GpsSample>>,
    warnings: Vec<String>,
}

impl Collector {
    fn feed(&mut self, reader: impl BufRead, source_name: &str, opts: &IngestOptions) -> Result<()> {
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(io_at(source_name))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec = match line.parse::<RawGpsRecord>() {
                Ok(r) => r,
                Err(message) if opts.strict => {
                    return Err(Error::Parse { source_name: source_name.to_string(), line: i + 1, message })
                }
                Err(message) => {
                    self.warnings.push(format!("{source_name}:{}: {message}", i + 1));
                    continue;
                }
            };
            if rec.timestamp.date() != opts.day || !opts.bbox.contains(rec.lat, rec.lon) {
                continue;
            }
            let t = (rec.timestamp - opts.epoch).num_seconds() as f64;
            if !self.samples.contains_key(&rec.vehicle_id) {
                self.order.push(rec.vehicle_id.clone());
            }
            self.samples.entry(rec.vehicle_id).or_default().push(GpsSample::new(t, rec.lat, rec.lon));
        }
        Ok(())
    }

    fn finish(mut self) -> IngestOutcome {
        let mut trajectories = Vec::new();
        for id in self.order {
            let mut samples = self.samples.remove(&id).unwrap_or_default();
            // stable sort keeps the first record among equal timestamps
            samples.sort_by(|a, b| a.t.total_cmp(&b.t));
            samples.dedup_by(|later, earlier| later.t == earlier.t);
            if samples.len() >= 2 {
                trajectories.push(VehicleTrajectory::new(id, samples));
            }
        }
        IngestOutcome { trajectories, warnings: self.warnings }
    }
}

/// Reads records from `reader` only.
pub fn ingest_reader(reader: impl BufRead, source_name: &str, opts: &IngestOptions) -> Result<IngestOutcome> {
    let mut c = Collector::default();
    c.feed(reader, source_name, opts)?;
    non_empty(c.finish())
}

/// Per vehicle: records of `opts.day` inside `opts.bbox`, in seconds since
/// `opts.epoch`, sorted, with repeated timestamps reduced to their first
/// record. Vehicles left with fewer than two samples are dropped.
pub fn ingest_tdrive(paths: &[PathBuf], opts: &IngestOptions) -> Result<IngestOutcome> {
    let mut c = Collector::default();
    for path in paths {
        let file = File::open(path).map_err(io_at(path))?;
        c.feed(BufReader::new(file), &path.display().to_string(), opts)?;
    }
    non_empty(c.finish())
}

fn non_empty(out: IngestOutcome) -> Result<IngestOutcome> {
    if out.trajectories.is_empty() {
        return Err(Error::Invalid("no vehicle has two or more samples inside the day and bounding box".into()));
    }
    Ok(out)
}
