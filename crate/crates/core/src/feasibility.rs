//! Independent schedule checker.
//!
//! Re-derives every rule from the scenario alone (positions, distances,
//! buffers, payments) without consulting contact sets, models or solver
//! state, so that it can vouch for any algorithm's output.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::geo::{haversine_distance, position_at};
use crate::model::{Scenario, Schedule, SolveResult, Transmission};
use crate::units::{BufferRule, Money};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CheckOptions {
    /// Also require at most one sensor per vehicle per slot.
    pub vehicle_exclusive: bool,
    /// Also require every unit's delay to stay strictly below this.
    pub delay_limit_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Breach {
    UnknownIndex(Transmission),
    OutOfRange { tx: Transmission, distance_m: Option<f64> },
    SharedSensorSlot(Transmission),
    BufferUnderrun { sensor: usize, slot: u32, unit: u64 },
    OverBudget { spend: Money, budget: Money },
    Underpaid { vehicle: usize, paid: Money },
    OverVehicleCap { vehicle: usize, units: u64 },
    VehicleDoubleBooked { vehicle: usize, slot: u32 },
    DelayTooLong { sensor: usize, slot: u32, delay_s: f64 },
    ResultMismatch(&'static str),
}

pub fn check_schedule(s: &Scenario, sched: &Schedule, opts: &CheckOptions) -> Vec<Breach> {
    let mut out = Vec::new();
    let txs: Vec<Transmission> = sched.iter().copied().collect();
    let p = &s.params;

    for &tx in &txs {
        if tx.vehicle >= s.n_vehicles() || tx.sensor >= s.n_sensors() || tx.slot >= s.horizon() {
            out.push(Breach::UnknownIndex(tx));
            continue;
        }
        let d = position_at(&s.vehicles[tx.vehicle], tx.slot).map(|pos| haversine_distance(pos, s.sensors[tx.sensor].position));
        if !d.is_some_and(|d| d <= p.range_m) {
            out.push(Breach::OutOfRange { tx, distance_m: d });
        }
    }
    if !out.is_empty() {
        return out;
    }

    let mut by_sensor: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for tx in &txs {
        by_sensor.entry(tx.sensor).or_default().push(tx.slot);
    }
    let (num, den) = (p.gen_rate.num() as u64, p.gen_rate.den() as u64);
    let lag = match p.buffer_rule {
        BufferRule::SameSlot => 1,
        BufferRule::NextSlot => 0,
    };
    for (&sensor, slots) in by_sensor.iter_mut() {
        slots.sort_unstable();
        for (k, &slot) in slots.iter().enumerate() {
            let unit = k as u64 + 1;
            if k > 0 && slots[k - 1] == slot {
                out.push(Breach::SharedSensorSlot(Transmission::new(usize::MAX, sensor, slot)));
            }
            // unit generated by time slot + lag: unit / rate <= slot + lag
            if unit * den > (slot as u64 + lag) * num {
                out.push(Breach::BufferUnderrun { sensor, slot, unit });
            }
            if let Some(limit) = opts.delay_limit_s {
                let delay = slot as f64 - unit as f64 * den as f64 / num as f64;
                if !(delay < limit) {
                    out.push(Breach::DelayTooLong { sensor, slot, delay_s: delay });
                }
            }
        }
    }

    let mut units: BTreeMap<usize, u64> = BTreeMap::new();
    for tx in &txs {
        *units.entry(tx.vehicle).or_insert(0) += 1;
    }
    let unit_ticks = p.unit_cost.ticks() as i128;
    let total: i128 = units.values().map(|&n| n as i128 * unit_ticks).sum();
    if total > p.c_max.ticks() as i128 {
        out.push(Breach::OverBudget { spend: Money::from_ticks(total as i64), budget: p.c_max });
    }
    for (&vehicle, &n) in &units {
        let paid = n as i128 * unit_ticks;
        if paid <= p.c_min.ticks() as i128 {
            out.push(Breach::Underpaid { vehicle, paid: Money::from_ticks(paid as i64) });
        }
        if let Some(cap) = p.per_vehicle_cap {
            if n >= cap as u64 {
                out.push(Breach::OverVehicleCap { vehicle, units: n });
            }
        }
    }

    if opts.vehicle_exclusive {
        let mut seen: BTreeMap<(usize, u32), usize> = BTreeMap::new();
        for tx in &txs {
            let c = seen.entry((tx.vehicle, tx.slot)).or_insert(0);
            *c += 1;
            if *c == 2 {
                out.push(Breach::VehicleDoubleBooked { vehicle: tx.vehicle, slot: tx.slot });
            }
        }
    }
    out
}

/// [`check_schedule`] plus consistency of the reported payments.
pub fn check_result(s: &Scenario, r: &SolveResult, opts: &CheckOptions) -> Vec<Breach> {
    let mut out = check_schedule(s, &r.schedule, opts);
    let mut paid: BTreeMap<usize, Money> = BTreeMap::new();
    for tx in r.schedule.iter() {
        *paid.entry(tx.vehicle).or_insert(Money::ZERO) += s.params.unit_cost;
    }
    if paid != r.compensation {
        out.push(Breach::ResultMismatch("compensation"));
    }
    if paid.values().copied().sum::<Money>() != r.total_spend {
        out.push(Breach::ResultMismatch("total spend"));
    }
    let participants: alloc::collections::BTreeSet<usize> =
        paid.iter().filter(|(_, m)| **m > s.params.c_min).map(|(v, _)| *v).collect();
    if participants != r.participants {
        out.push(Breach::ResultMismatch("participants"));
    }
    out
}
