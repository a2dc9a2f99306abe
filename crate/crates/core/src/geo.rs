//! Great-circle distance, per-slot positions and contact extraction.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{GpsSample, Scenario, VehicleTrajectory};

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub const fn new(lat: f64, lon: f64) -> Self {
        LatLon { lat, lon }
    }

    pub fn is_valid(&self) -> bool {
        (-90.0..=90.0).contains(&self.lat) && (-180.0..=180.0).contains(&self.lon)
    }
}

/// Haversine distance in meters on a sphere of radius [`EARTH_RADIUS_M`].
pub fn haversine_distance(a: LatLon, b: LatLon) -> f64 {
    let (phi1, phi2) = (a.lat.to_radians(), b.lat.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (b.lon - a.lon).to_radians();
    let s1 = libm::sin(dphi / 2.0);
    let s2 = libm::sin(dlambda / 2.0);
    let h = s1 * s1 + libm::cos(phi1) * libm::cos(phi2) * s2 * s2;
    2.0 * EARTH_RADIUS_M * libm::asin(libm::sqrt(h.clamp(0.0, 1.0)))
}

/// Position at integer second `slot`, linearly interpolated in degrees.
/// `None` outside the trajectory's time span.
pub fn position_at(traj: &VehicleTrajectory, slot: u32) -> Option<LatLon> {
    let t = slot as f64;
    let samples = &traj.samples;
    let first = samples.first()?;
    let last = samples.last()?;
    if t < first.t || t > last.t {
        return None;
    }
    // first sample with timestamp >= t
    let i = samples.partition_point(|p| p.t < t);
    let hi = samples[i];
    if hi.t == t || i == 0 {
        return Some(hi.pos);
    }
    let lo = samples[i - 1];
    let f = (t - lo.t) / (hi.t - lo.t);
    Some(LatLon::new(lo.pos.lat + f * (hi.pos.lat - lo.pos.lat), lo.pos.lon + f * (hi.pos.lon - lo.pos.lon)))
}

/// A vehicle within range of a sensor during one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactEvent {
    pub vehicle: usize,
    pub sensor: usize,
    pub slot: u32,
    pub distance_m: f64,
}

impl ContactEvent {
    fn key(&self) -> (u32, usize, usize) {
        (self.slot, self.sensor, self.vehicle)
    }
}

/// Contact events sorted by `(slot, sensor, vehicle)`, indexed by sensor and
/// by vehicle.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContactSet {
    events: Vec<ContactEvent>,
    by_sensor: Vec<Vec<usize>>,
    by_vehicle: Vec<Vec<usize>>,
}

impl ContactSet {
    pub fn from_events(mut events: Vec<ContactEvent>, n_vehicles: usize, n_sensors: usize) -> Self {
        events.sort_by_key(|e| e.key());
        events.dedup_by_key(|e| e.key());
        let mut by_sensor = alloc::vec![Vec::new(); n_sensors];
        let mut by_vehicle = alloc::vec![Vec::new(); n_vehicles];
        for (i, e) in events.iter().enumerate() {
            by_sensor[e.sensor].push(i);
            by_vehicle[e.vehicle].push(i);
        }
        ContactSet { events, by_sensor, by_vehicle }
    }

    pub fn events(&self) -> &[ContactEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Indices into [`Self::events`] for `sensor`, chronological.
    pub fn of_sensor(&self, sensor: usize) -> &[usize] {
        self.by_sensor.get(sensor).map_or(&[], Vec::as_slice)
    }

    pub fn of_vehicle(&self, vehicle: usize) -> &[usize] {
        self.by_vehicle.get(vehicle).map_or(&[], Vec::as_slice)
    }

    pub fn find(&self, vehicle: usize, sensor: usize, slot: u32) -> Option<&ContactEvent> {
        self.events.binary_search_by_key(&(slot, sensor, vehicle), ContactEvent::key).ok().map(|i| &self.events[i])
    }

    /// Events of `sensor` at `slot`, vehicles ascending.
    pub fn at(&self, sensor: usize, slot: u32) -> &[ContactEvent] {
        let lo = self.events.partition_point(|e| (e.slot, e.sensor) < (slot, sensor));
        let hi = self.events.partition_point(|e| (e.slot, e.sensor) <= (slot, sensor));
        &self.events[lo..hi]
    }
}

/// All `(vehicle, sensor, slot)` triples with a defined position within
/// `range_m` (inclusive) of the sensor.
pub fn extract_contacts(s: &Scenario) -> ContactSet {
    let range = s.params.range_m;
    let horizon = s.horizon();
    let mut events = Vec::new();
    for (v, traj) in s.vehicles.iter().enumerate() {
        let (Some(first), Some(last)) = (traj.samples.first(), traj.samples.last()) else {
            continue;
        };
        let start = libm::ceil(first.t.max(0.0));
        let end = libm::floor(last.t).min(horizon as f64 - 1.0);
        if start > end {
            continue;
        }
        for slot in start as u32..=end as u32 {
            let Some(pos) = position_at(traj, slot) else { continue };
            for (j, sensor) in s.sensors.iter().enumerate() {
                let d = haversine_distance(pos, sensor.position);
                if d <= range {
                    events.push(ContactEvent { vehicle: v, sensor: j, slot, distance_m: d });
                }
            }
        }
    }
    ContactSet::from_events(events, s.n_vehicles(), s.n_sensors())
}

/// Averages trips recorded over the same waypoint sequence: sample `i` of the
/// result has the mean position and mean timestamp of sample `i` of the inputs.
pub fn mean_trajectory(id: &str, trajs: &[VehicleTrajectory]) -> Result<VehicleTrajectory> {
    let first = trajs.first().ok_or(Error::EmptyInput)?;
    let k = first.samples.len();
    for (index, t) in trajs.iter().enumerate() {
        if t.samples.len() != k {
            return Err(Error::TrajectoryLengthMismatch { index, expected: k, found: t.samples.len() });
        }
    }
    let n = trajs.len() as f64;
    let samples: Vec<GpsSample> = (0..k)
        .map(|i| {
            let (mut t, mut lat, mut lon) = (0.0, 0.0, 0.0);
            for traj in trajs {
                let p = &traj.samples[i];
                t += p.t;
                lat += p.pos.lat;
                lon += p.pos.lon;
            }
            GpsSample::new(t / n, lat / n, lon / n)
        })
        .collect();
    if let Some(i) = samples.windows(2).position(|w| !(w[0].t < w[1].t)) {
        return Err(Error::NonMonotoneMean(i + 1));
    }
    Ok(VehicleTrajectory::new(id, samples))
}
