//! Domain types shared by every solver, scenario validation and compensation
//! accounting.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::geo::LatLon;
use crate::units::{BufferRule, FairnessWeight, GenRate, Money};

/// The scheduling horizon: `horizon_slots` one-second slots, indexed from 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeGrid {
    pub horizon_slots: u32,
}

impl TimeGrid {
    pub fn new(horizon_slots: u32) -> Self {
        TimeGrid { horizon_slots }
    }

    pub fn contains(&self, slot: u32) -> bool {
        slot < self.horizon_slots
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpsSample {
    /// Seconds since the scenario epoch.
    pub t: f64,
    pub pos: LatLon,
}

impl GpsSample {
    pub fn new(t: f64, lat: f64, lon: f64) -> Self {
        GpsSample { t, pos: LatLon::new(lat, lon) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleTrajectory {
    pub id: String,
    pub samples: Vec<GpsSample>,
}

impl VehicleTrajectory {
    pub fn new(id: impl Into<String>, samples: Vec<GpsSample>) -> Self {
        VehicleTrajectory { id: id.into(), samples }
    }

    /// A vehicle parked at `pos` from `start` to `end` seconds.
    pub fn stationary(id: impl Into<String>, pos: LatLon, start: f64, end: f64) -> Self {
        let mut samples = alloc::vec![GpsSample { t: start, pos }];
        if end > start {
            samples.push(GpsSample { t: end, pos });
        }
        VehicleTrajectory::new(id, samples)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sensor {
    pub id: String,
    pub position: LatLon,
}

impl Sensor {
    pub fn new(id: impl Into<String>, lat: f64, lon: f64) -> Self {
        Sensor { id: id.into(), position: LatLon::new(lat, lon) }
    }
}

/// Economic, radio and traffic parameters of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    /// Payment for relaying one data unit.
    pub unit_cost: Money,
    pub range_m: f64,
    pub gen_rate: GenRate,
    /// A vehicle participates only if paid strictly more than this.
    pub c_min: Money,
    /// Total budget.
    pub c_max: Money,
    pub fairness_weight: FairnessWeight,
    pub delay_bound_s: Option<f64>,
    pub delay_tolerance: Option<f64>,
    /// Each vehicle relays strictly fewer than this many units.
    pub per_vehicle_cap: Option<u32>,
    pub unit_size_bytes: u32,
    pub buffer_rule: BufferRule,
}

impl Default for ParamSet {
    /// $1/MB with 1 KiB units, 2 km range, one unit per second, $2 minimum
    /// and $1,000 budget.
    fn default() -> Self {
        let unit_size_bytes = 1024;
        ParamSet {
            unit_cost: Money::unit_cost_from_price_per_mb(Money::from_micros(1_000_000), unit_size_bytes),
            range_m: 2_000.0,
            gen_rate: GenRate::per_second(1),
            c_min: Money::from_micros(2_000_000),
            c_max: Money::from_micros(1_000_000_000),
            fairness_weight: FairnessWeight::new(1, 2).expect("valid"),
            delay_bound_s: None,
            delay_tolerance: None,
            per_vehicle_cap: None,
            unit_size_bytes,
            buffer_rule: BufferRule::SameSlot,
        }
    }
}

impl ParamSet {
    /// Smallest number of units whose payment strictly exceeds `c_min`.
    pub fn min_units_to_participate(&self) -> u64 {
        if self.c_min < Money::ZERO {
            return 1;
        }
        self.c_min.whole_units(self.unit_cost) + 1
    }

    /// Largest number of units payable within `c_max`.
    pub fn budget_units(&self) -> u64 {
        self.c_max.whole_units(self.unit_cost)
    }

    /// Largest number of units any single vehicle may relay.
    pub fn max_units_per_vehicle(&self) -> Option<u64> {
        self.per_vehicle_cap.map(|n| (n as u64).saturating_sub(1))
    }

    pub fn buffer_cap(&self, slot: u32) -> u64 {
        self.buffer_rule.cap(self.gen_rate, slot)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub grid: TimeGrid,
    /// Greedy baselines visit vehicles in this order.
    pub vehicles: Vec<VehicleTrajectory>,
    pub sensors: Vec<Sensor>,
    pub params: ParamSet,
}

impl Scenario {
    pub fn n_vehicles(&self) -> usize {
        self.vehicles.len()
    }

    pub fn n_sensors(&self) -> usize {
        self.sensors.len()
    }

    pub fn horizon(&self) -> u32 {
        self.grid.horizon_slots
    }
}

/// One data unit relayed from `sensor` to `vehicle` during `slot`.
///
/// Ordering is canonical: by slot, then sensor, then vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transmission {
    pub slot: u32,
    pub sensor: usize,
    pub vehicle: usize,
}

impl Transmission {
    pub fn new(vehicle: usize, sensor: usize, slot: u32) -> Self {
        Transmission { slot, sensor, vehicle }
    }
}

/// A set of transmissions with at most one per `(sensor, slot)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Schedule {
    transmissions: Vec<Transmission>,
}

impl Schedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_transmissions(items: impl IntoIterator<Item = Transmission>) -> Result<Self> {
        let mut transmissions: Vec<Transmission> = items.into_iter().collect();
        transmissions.sort_unstable();
        transmissions.dedup();
        for w in transmissions.windows(2) {
            if w[0].slot == w[1].slot && w[0].sensor == w[1].sensor {
                return Err(Error::DuplicateSensorSlot { sensor: w[0].sensor, slot: w[0].slot });
            }
        }
        Ok(Schedule { transmissions })
    }

    /// Checks every index against the scenario's dimensions.
    pub fn check_indices(&self, s: &Scenario) -> Result<()> {
        for tx in &self.transmissions {
            if tx.vehicle >= s.n_vehicles() {
                return Err(Error::UnknownVehicle(tx.vehicle));
            }
            if tx.sensor >= s.n_sensors() {
                return Err(Error::UnknownSensor(tx.sensor));
            }
            if !s.grid.contains(tx.slot) {
                return Err(Error::SlotOutOfRange { slot: tx.slot, horizon: s.horizon() });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.transmissions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transmissions.is_empty()
    }

    /// Transmissions in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = &Transmission> + '_ {
        self.transmissions.iter()
    }

    pub fn as_slice(&self) -> &[Transmission] {
        &self.transmissions
    }

    pub fn contains(&self, tx: &Transmission) -> bool {
        self.transmissions.binary_search(tx).is_ok()
    }

    pub fn count_for_vehicle(&self, vehicle: usize) -> u64 {
        self.transmissions.iter().filter(|t| t.vehicle == vehicle).count() as u64
    }

    pub fn per_vehicle_counts(&self, n_vehicles: usize) -> Vec<u64> {
        let mut counts = alloc::vec![0; n_vehicles];
        for tx in &self.transmissions {
            if let Some(c) = counts.get_mut(tx.vehicle) {
                *c += 1;
            }
        }
        counts
    }

    pub fn per_sensor_counts(&self, n_sensors: usize) -> Vec<u64> {
        let mut counts = alloc::vec![0; n_sensors];
        for tx in &self.transmissions {
            if let Some(c) = counts.get_mut(tx.sensor) {
                *c += 1;
            }
        }
        counts
    }

    pub fn vehicles(&self) -> BTreeSet<usize> {
        self.transmissions.iter().map(|t| t.vehicle).collect()
    }

    /// Keeps the transmissions for which `keep` holds.
    pub fn filtered(&self, mut keep: impl FnMut(&Transmission) -> bool) -> Schedule {
        Schedule { transmissions: self.transmissions.iter().copied().filter(|t| keep(t)).collect() }
    }

    pub fn union(&self, other: &Schedule) -> Result<Schedule> {
        Schedule::from_transmissions(self.transmissions.iter().chain(other.transmissions.iter()).copied())
    }
}

impl<'a> IntoIterator for &'a Schedule {
    type Item = &'a Transmission;
    type IntoIter = core::slice::Iter<'a, Transmission>;

    fn into_iter(self) -> Self::IntoIter {
        self.transmissions.iter()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolverStats {
    pub nodes_explored: u64,
    pub wall_time_s: f64,
    pub proven_optimal: bool,
    /// Upper bound on the optimal objective; equals the objective when
    /// `proven_optimal` is set.
    pub dual_bound: f64,
}

/// A schedule together with its participants and payments.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub schedule: Schedule,
    pub participants: BTreeSet<usize>,
    /// Payment per vehicle; vehicles without transmissions are absent.
    pub compensation: BTreeMap<usize, Money>,
    pub objective_value: f64,
    pub total_spend: Money,
    pub stats: SolverStats,
}

impl SolveResult {
    /// Derives participants, compensation and spend from `schedule`.
    pub fn from_schedule(schedule: Schedule, params: &ParamSet, objective_value: f64, stats: SolverStats) -> Self {
        let mut compensation = BTreeMap::new();
        for tx in schedule.iter() {
            *compensation.entry(tx.vehicle).or_insert(Money::ZERO) += params.unit_cost;
        }
        let participants = compensation.iter().filter(|(_, c)| **c > params.c_min).map(|(v, _)| *v).collect();
        let total_spend = compensation.values().copied().sum();
        SolveResult { schedule, participants, compensation, objective_value, total_spend, stats }
    }

    pub fn throughput(&self) -> u64 {
        self.schedule.len() as u64
    }
}

/// Payment owed to `vehicle` under `sched`.
pub fn compensation_of(sched: &Schedule, vehicle: usize, n_vehicles: usize, p: &ParamSet) -> Result<Money> {
    if vehicle >= n_vehicles {
        return Err(Error::UnknownVehicle(vehicle));
    }
    Ok(p.unit_cost.times(sched.count_for_vehicle(vehicle)))
}

/// Vehicles whose payment strictly exceeds `c_min`.
pub fn participants_of(sched: &Schedule, p: &ParamSet) -> BTreeSet<usize> {
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for tx in sched.iter() {
        *counts.entry(tx.vehicle).or_insert(0) += 1;
    }
    counts.into_iter().filter(|(_, n)| p.unit_cost.times(*n) > p.c_min).map(|(v, _)| v).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationCode {
    EmptyHorizon,
    DuplicateVehicleId,
    DuplicateSensorId,
    EmptyTrajectory,
    NonMonotoneTimestamps,
    TimestampOutsideHorizon,
    InvalidCoordinate,
    NonPositiveUnitCost,
    NonPositiveRange,
    NegativeMinCompensation,
    NonPositiveBudget,
    MinNotBelowBudget,
    InvalidDelayBound,
    NegativeDelayTolerance,
    ZeroVehicleCap,
    ZeroUnitSize,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::EmptyHorizon => "EmptyHorizon",
            ViolationCode::DuplicateVehicleId => "DuplicateVehicleId",
            ViolationCode::DuplicateSensorId => "DuplicateSensorId",
            ViolationCode::EmptyTrajectory => "EmptyTrajectory",
            ViolationCode::NonMonotoneTimestamps => "NonMonotoneTimestamps",
            ViolationCode::TimestampOutsideHorizon => "TimestampOutsideHorizon",
            ViolationCode::InvalidCoordinate => "InvalidCoordinate",
            ViolationCode::NonPositiveUnitCost => "NonPositiveUnitCost",
            ViolationCode::NonPositiveRange => "NonPositiveRange",
            ViolationCode::NegativeMinCompensation => "NegativeMinCompensation",
            ViolationCode::NonPositiveBudget => "NonPositiveBudget",
            ViolationCode::MinNotBelowBudget => "MinNotBelowBudget",
            ViolationCode::InvalidDelayBound => "InvalidDelayBound",
            ViolationCode::NegativeDelayTolerance => "NegativeDelayTolerance",
            ViolationCode::ZeroVehicleCap => "ZeroVehicleCap",
            ViolationCode::ZeroUnitSize => "ZeroUnitSize",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub code: ViolationCode,
    /// Identifier of the offending vehicle or sensor, when there is one.
    pub subject: Option<String>,
}

impl Violation {
    fn new(code: ViolationCode) -> Self {
        Violation { code, subject: None }
    }

    fn about(code: ViolationCode, subject: &str) -> Self {
        Violation { code, subject: Some(subject.to_string()) }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.subject {
            Some(s) => write!(f, "{} ({})", self.code, s),
            None => write!(f, "{}", self.code),
        }
    }
}

/// Lists every invariant the scenario breaks, in a deterministic order.
pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    use ViolationCode::*;
    let mut out = Vec::new();
    if s.grid.horizon_slots == 0 {
        out.push(Violation::new(EmptyHorizon));
    }

    let mut seen = BTreeSet::new();
    for v in &s.vehicles {
        if !seen.insert(v.id.as_str()) {
            out.push(Violation::about(DuplicateVehicleId, &v.id));
        }
    }
    let mut seen = BTreeSet::new();
    for sensor in &s.sensors {
        if !seen.insert(sensor.id.as_str()) {
            out.push(Violation::about(DuplicateSensorId, &sensor.id));
        }
        if !sensor.position.is_valid() {
            out.push(Violation::about(InvalidCoordinate, &sensor.id));
        }
    }

    let horizon = s.grid.horizon_slots as f64;
    for v in &s.vehicles {
        if v.samples.is_empty() {
            out.push(Violation::about(EmptyTrajectory, &v.id));
            continue;
        }
        if v.samples.windows(2).any(|w| !(w[0].t < w[1].t)) {
            out.push(Violation::about(NonMonotoneTimestamps, &v.id));
        }
        if v.samples.iter().any(|p| !(p.t >= 0.0 && p.t < horizon)) {
            out.push(Violation::about(TimestampOutsideHorizon, &v.id));
        }
        if v.samples.iter().any(|p| !p.pos.is_valid()) {
            out.push(Violation::about(InvalidCoordinate, &v.id));
        }
    }

    let p = &s.params;
    if p.unit_cost <= Money::ZERO {
        out.push(Violation::new(NonPositiveUnitCost));
    }
    if !(p.range_m.is_finite() && p.range_m > 0.0) {
        out.push(Violation::new(NonPositiveRange));
    }
    if p.c_min < Money::ZERO {
        out.push(Violation::new(NegativeMinCompensation));
    }
    if p.c_max <= Money::ZERO {
        out.push(Violation::new(NonPositiveBudget));
    }
    if p.c_min >= p.c_max {
        out.push(Violation::new(MinNotBelowBudget));
    }
    if let Some(d) = p.delay_bound_s {
        if !(d.is_finite() && d > 0.0) {
            out.push(Violation::new(InvalidDelayBound));
        }
    }
    if let Some(a) = p.delay_tolerance {
        if !(a.is_finite() && a >= 0.0) {
            out.push(Violation::new(NegativeDelayTolerance));
        }
    }
    if p.per_vehicle_cap == Some(0) {
        out.push(Violation::new(ZeroVehicleCap));
    }
    if p.unit_size_bytes == 0 {
        out.push(Violation::new(ZeroUnitSize));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn dollars(d: f64) -> Money {
        Money::from_dollars(d).unwrap()
    }

    fn tiny() -> Scenario {
        Scenario {
            grid: TimeGrid::new(10),
            vehicles: vec![VehicleTrajectory::new(
                "v0",
                vec![GpsSample::new(0.0, 39.9, 116.4), GpsSample::new(9.0, 39.9, 116.41)],
            )],
            sensors: vec![Sensor::new("s0", 39.9, 116.405)],
            params: ParamSet { unit_cost: dollars(1.0), c_min: dollars(2.0), c_max: dollars(5.0), ..ParamSet::default() },
        }
    }

    fn codes(s: &Scenario) -> Vec<ViolationCode> {
        validate_scenario(s).into_iter().map(|v| v.code).collect()
    }

    #[test]
    fn valid_tiny_scenario_has_no_violations() {
        assert!(validate_scenario(&tiny()).is_empty());
    }

    #[test]
    fn duplicate_vehicle_id() {
        let mut s = tiny();
        s.vehicles.push(s.vehicles[0].clone());
        assert_eq!(codes(&s), vec![ViolationCode::DuplicateVehicleId]);
    }

    #[test]
    fn equal_timestamps_are_non_monotone() {
        let mut s = tiny();
        s.vehicles[0].samples = vec![GpsSample::new(5.0, 39.9, 116.4), GpsSample::new(5.0, 39.9, 116.4)];
        assert_eq!(codes(&s), vec![ViolationCode::NonMonotoneTimestamps]);
    }

    #[test]
    fn parameter_violations() {
        let mut s = tiny();
        s.params.c_min = dollars(5.0);
        s.params.range_m = 0.0;
        s.params.per_vehicle_cap = Some(0);
        s.vehicles[0].samples[1].t = 10.0;
        assert_eq!(
            codes(&s),
            vec![
                ViolationCode::TimestampOutsideHorizon,
                ViolationCode::NonPositiveRange,
                ViolationCode::MinNotBelowBudget,
                ViolationCode::ZeroVehicleCap
            ]
        );
    }

    #[test]
    fn compensation_examples() {
        let p = ParamSet { unit_cost: dollars(1.0), ..ParamSet::default() };
        let sched = Schedule::from_transmissions((0..5).map(|t| Transmission::new(0, 0, t))).unwrap();
        assert_eq!(compensation_of(&sched, 0, 2, &p).unwrap(), dollars(5.0));
        assert_eq!(compensation_of(&sched, 1, 2, &p).unwrap(), Money::ZERO);
        assert_eq!(compensation_of(&sched, 2, 2, &p), Err(Error::UnknownVehicle(2)));

        let p = ParamSet::default();
        let sched = Schedule::from_transmissions((0..3).map(|t| Transmission::new(0, 0, t))).unwrap();
        assert_eq!(compensation_of(&sched, 0, 1, &p).unwrap().to_dollars(), 0.0029296875);
    }

    #[test]
    fn participation_is_strict() {
        let p = ParamSet { unit_cost: dollars(1.0), c_min: dollars(2.0), ..ParamSet::default() };
        let mut txs: Vec<_> = (0..5).map(|t| Transmission::new(0, 0, t)).collect();
        txs.extend((0..2).map(|t| Transmission::new(1, 1, t)));
        let sched = Schedule::from_transmissions(txs).unwrap();
        assert_eq!(participants_of(&sched, &p), BTreeSet::from([0]));
        assert!(participants_of(&Schedule::new(), &p).is_empty());

        let p = ParamSet { unit_cost: dollars(2.001), c_min: dollars(2.0), ..ParamSet::default() };
        let sched = Schedule::from_transmissions([Transmission::new(0, 0, 0)]).unwrap();
        assert_eq!(participants_of(&sched, &p), BTreeSet::from([0]));
        assert_eq!(p.min_units_to_participate(), 1);
    }

    #[test]
    fn schedule_rejects_shared_sensor_slot() {
        let err = Schedule::from_transmissions([Transmission::new(0, 1, 3), Transmission::new(2, 1, 3)]);
        assert_eq!(err, Err(Error::DuplicateSensorSlot { sensor: 1, slot: 3 }));
    }
}
