//! Seeded synthetic scenarios for tests and benchmarks.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geo::{extract_contacts, ContactSet, LatLon};
use crate::model::{GpsSample, ParamSet, Scenario, Sensor, TimeGrid, VehicleTrajectory};
use crate::units::{BufferRule, GenRate, Money};

const ORIGIN: LatLon = LatLon::new(39.9, 116.4);
const METERS_PER_DEG_LAT: f64 = 111_194.9;

fn offset(base: LatLon, north_m: f64, east_m: f64) -> LatLon {
    let m_per_deg_lon = METERS_PER_DEG_LAT * libm::cos(base.lat.to_radians());
    LatLon::new(base.lat + north_m / METERS_PER_DEG_LAT, base.lon + east_m / m_per_deg_lon)
}

fn dollars(d: u32) -> Money {
    Money::from_micros(d as i64 * 1_000_000)
}

/// A scenario with at most 3 vehicles, 3 sensors and 12 slots.
///
/// Sensors sit 1 km apart with a 300 m range; each vehicle moves between two
/// to six waypoints that are near some sensor or far from all of them, and
/// often dwells at a waypoint. Prices are whole dollars per unit;
/// thresholds, budgets, generation rates, buffer rules and vehicle caps vary
/// with the seed.
pub fn tiny_scenario(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_s = rng.random_range(1..=3usize);
    let n_v = rng.random_range(1..=3usize);
    let horizon = rng.random_range(4..=12u32);

    let sensors: Vec<Sensor> = (0..n_s)
        .map(|j| {
            let p = offset(ORIGIN, 0.0, 1_000.0 * j as f64);
            Sensor::new(format!("s{j}"), p.lat, p.lon)
        })
        .collect();

    let vehicles = (0..n_v)
        .map(|v| {
            let n_way = rng.random_range(2..=6usize).min(horizon as usize);
            let mut times: Vec<u32> = Vec::new();
            while times.len() < n_way {
                let t = rng.random_range(0..horizon);
                if !times.contains(&t) {
                    times.push(t);
                }
            }
            times.sort_unstable();
            let mut samples: Vec<GpsSample> = Vec::with_capacity(n_way);
            for t in times {
                let pos = match samples.last() {
                    // dwell
                    Some(prev) if rng.random_bool(0.5) => prev.pos,
                    _ if rng.random_bool(0.75) => {
                        let j = rng.random_range(0..n_s);
                        offset(sensors[j].position, rng.random_range(-250.0..250.0), rng.random_range(-150.0..150.0))
                    }
                    _ => offset(ORIGIN, 2_000.0, rng.random_range(0.0..2_000.0)),
                };
                samples.push(GpsSample { t: t as f64, pos });
            }
            VehicleTrajectory::new(format!("v{v}"), samples)
        })
        .collect();

    let rates = [GenRate::per_second(1), GenRate::new(1, 2).expect("valid"), GenRate::per_second(2), GenRate::new(2, 3).expect("valid")];
    let c_min = rng.random_range(0..=2u32);
    let params = ParamSet {
        unit_cost: dollars(1),
        range_m: 300.0,
        gen_rate: rates[rng.random_range(0..rates.len())],
        c_min: dollars(c_min),
        c_max: dollars(rng.random_range(c_min + 1..=10)),
        buffer_rule: if rng.random_bool(0.5) { BufferRule::SameSlot } else { BufferRule::NextSlot },
        per_vehicle_cap: if rng.random_bool(0.25) { Some(rng.random_range(3..=6)) } else { None },
        ..ParamSet::default()
    };
    Scenario { grid: TimeGrid::new(horizon), vehicles, sensors, params }
}

/// The first tiny scenario, starting from `seed` and moving to derived
/// seeds, whose contact set has at most `max_events` events.
pub fn tiny_instance(seed: u64, max_events: usize) -> (Scenario, ContactSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut attempt = seed;
    loop {
        let s = tiny_scenario(attempt);
        let c = extract_contacts(&s);
        if c.len() <= max_events {
            return (s, c);
        }
        attempt = rng.random();
    }
}

/// Shape of a synthetic city scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CityConfig {
    pub n_vehicles: usize,
    pub n_sensors: usize,
    pub horizon_s: u32,
    /// Side of the square region in meters.
    pub region_m: f64,
    pub speed_m_s: f64,
    /// Seconds between waypoints.
    pub leg_s: u32,
    pub range_m: f64,
}

impl Default for CityConfig {
    fn default() -> Self {
        CityConfig {
            n_vehicles: 10,
            n_sensors: 10,
            horizon_s: 1_800,
            region_m: 4_000.0,
            speed_m_s: 8.0,
            leg_s: 60,
            range_m: 250.0,
        }
    }
}

/// Vehicles drive straight legs between random waypoints inside a square
/// region; sensors are placed uniformly at random. Prices follow the default
/// parameters ($1/MB, 1 KiB units) with a $0.01 threshold and $0.5 budget.
pub fn city_scenario(cfg: &CityConfig, seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = cfg.region_m;
    let sensors = (0..cfg.n_sensors)
        .map(|j| {
            let p = offset(ORIGIN, rng.random_range(0.0..side), rng.random_range(0.0..side));
            Sensor::new(format!("s{j}"), p.lat, p.lon)
        })
        .collect();
    let vehicles = (0..cfg.n_vehicles)
        .map(|v| {
            let (mut n, mut e) = (rng.random_range(0.0..side), rng.random_range(0.0..side));
            let mut samples = alloc::vec![GpsSample { t: 0.0, pos: offset(ORIGIN, n, e) }];
            let mut t = 0;
            while t + cfg.leg_s < cfg.horizon_s {
                t += cfg.leg_s;
                let heading: f64 = rng.random_range(0.0..core::f64::consts::TAU);
                let step = cfg.speed_m_s * cfg.leg_s as f64;
                n = (n + step * libm::cos(heading)).clamp(0.0, side);
                e = (e + step * libm::sin(heading)).clamp(0.0, side);
                samples.push(GpsSample { t: t as f64, pos: offset(ORIGIN, n, e) });
            }
            VehicleTrajectory::new(format!("taxi{v}"), samples)
        })
        .collect();
    let params = ParamSet {
        range_m: cfg.range_m,
        c_min: Money::from_micros(10_000),
        c_max: Money::from_micros(500_000),
        ..ParamSet::default()
    };
    Scenario { grid: TimeGrid::new(cfg.horizon_s), vehicles, sensors, params }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_scenario;

    #[test]
    fn tiny_scenarios_are_valid_and_reproducible() {
        for seed in 0..200 {
            let s = tiny_scenario(seed);
            assert!(validate_scenario(&s).is_empty(), "seed {seed}: {:?}", validate_scenario(&s));
            assert_eq!(s, tiny_scenario(seed));
        }
        let (_, c) = tiny_instance(5, 25);
        assert!(c.len() <= 25);
    }

    #[test]
    fn city_scenario_is_valid() {
        let s = city_scenario(&CityConfig::default(), 1);
        assert!(validate_scenario(&s).is_empty());
        assert_eq!(s.n_vehicles(), 10);
        assert!(!extract_contacts(&s).is_empty());
    }
}
