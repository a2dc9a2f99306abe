//! Slot-by-slot greedy baselines.
//!
//! Every slot, each sensor (in input order) with a buffered unit hands it to
//! the first in-range vehicle (in input order) that has not received anything
//! else during that slot. Payment is checked before each unit so the budget
//! is never exceeded. Once the run ends, vehicles paid no more than `c_min`
//! are excluded and their transmissions discarded.
//!
//! [`greedy_n`] recycles the money freed by those exclusions into further
//! passes over the vehicles that were not selected yet.

use alloc::vec::Vec;

use crate::geo::ContactSet;
use crate::model::{Scenario, Schedule, SolveResult, SolverStats, Transmission};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GreedyNOptions {
    /// Units handed to excluded vehicles return to the sensor buffers and
    /// their slots become free again. By default they stay consumed: the data
    /// left the sensor and was lost with the unpaid vehicle.
    pub reclaim_excluded_units: bool,
}

/// One greedy pass on top of existing commitments.
#[derive(Debug, Clone)]
pub(crate) struct Pass<'a> {
    /// Units this pass may pay for.
    pub budget_units: u64,
    /// Vehicles that may receive new units.
    pub pool: &'a [bool],
    /// Transmissions that already happened: their sensor slot is taken, the
    /// unit has left the buffer and the vehicle is busy during that slot.
    pub committed: &'a [Transmission],
    /// Units each vehicle has already been paid for.
    pub paid_units: &'a [u64],
}

#[derive(Debug, Clone, Default)]
pub(crate) struct PassOutcome {
    /// New transmissions of vehicles that end up above the threshold.
    pub retained: Vec<Transmission>,
    /// New transmissions of vehicles that end up excluded.
    pub excluded: Vec<Transmission>,
}

pub(crate) fn run_pass(s: &Scenario, contacts: &ContactSet, pass: &Pass<'_>) -> PassOutcome {
    let p = &s.params;
    let (n_v, n_s, horizon) = (s.n_vehicles(), s.n_sensors(), s.horizon());
    let max_units = p.max_units_per_vehicle();

    // per sensor: committed slots in order, and for each of them the least
    // number of new units that may precede it or any later commitment
    let mut commit_slots: Vec<Vec<u32>> = alloc::vec![Vec::new(); n_s];
    for tx in pass.committed {
        commit_slots[tx.sensor].push(tx.slot);
    }
    let mut headroom: Vec<Vec<i64>> = Vec::with_capacity(n_s);
    for slots in commit_slots.iter_mut() {
        slots.sort_unstable();
        let mut h: Vec<i64> =
            slots.iter().enumerate().map(|(i, &t)| p.buffer_cap(t) as i64 - (i as i64 + 1)).collect();
        for i in (0..h.len().saturating_sub(1)).rev() {
            h[i] = h[i].min(h[i + 1]);
        }
        headroom.push(h);
    }

    let mut busy: Vec<Vec<u32>> = alloc::vec![Vec::new(); n_v];
    for tx in pass.committed {
        busy[tx.vehicle].push(tx.slot);
    }
    for b in busy.iter_mut() {
        b.sort_unstable();
    }

    let mut count: Vec<u64> = pass.paid_units.to_vec();
    count.resize(n_v, 0);
    let mut new_sent = alloc::vec![0u64; n_s];
    let mut next_commit = alloc::vec![0usize; n_s];
    let mut received_at: Vec<Option<u32>> = alloc::vec![None; n_v];
    let mut spent = 0u64;
    let mut fresh = Vec::new();

    'slots: for t in 0..horizon {
        for j in 0..n_s {
            // commitments at or before t
            let slots = &commit_slots[j];
            while next_commit[j] < slots.len() && slots[next_commit[j]] < t {
                next_commit[j] += 1;
            }
            let i = next_commit[j];
            if i < slots.len() && slots[i] == t {
                continue;
            }
            let sent_before = i as u64 + new_sent[j];
            if sent_before + 1 > p.buffer_cap(t) {
                continue;
            }
            if i < slots.len() && new_sent[j] as i64 + 1 > headroom[j][i] {
                // sending now would starve a later commitment
                continue;
            }
            let chosen = contacts.at(j, t).iter().map(|e| e.vehicle).find(|&v| {
                pass.pool[v]
                    && received_at[v] != Some(t)
                    && busy[v].binary_search(&t).is_err()
                    && max_units.is_none_or(|cap| count[v] < cap)
            });
            if let Some(v) = chosen {
                if spent == pass.budget_units {
                    break 'slots;
                }
                spent += 1;
                count[v] += 1;
                new_sent[j] += 1;
                received_at[v] = Some(t);
                fresh.push(Transmission::new(v, j, t));
                if spent == pass.budget_units {
                    break 'slots;
                }
            }
        }
    }

    let min_units = p.min_units_to_participate();
    let (retained, excluded) = fresh.into_iter().partition(|tx| count[tx.vehicle] >= min_units);
    PassOutcome { retained, excluded }
}

fn result_of(s: &Scenario, transmissions: Vec<Transmission>) -> SolveResult {
    let schedule = Schedule::from_transmissions(transmissions).expect("one transmission per sensor slot");
    let throughput = schedule.len() as f64;
    SolveResult::from_schedule(schedule, &s.params, throughput, SolverStats::default())
}

/// The greedy baseline. Its objective value is the throughput.
pub fn greedy(s: &Scenario, contacts: &ContactSet) -> SolveResult {
    let pool = alloc::vec![true; s.n_vehicles()];
    let out = run_pass(
        s,
        contacts,
        &Pass { budget_units: s.params.budget_units(), pool: &pool, committed: &[], paid_units: &[] },
    );
    result_of(s, out.retained)
}

pub fn greedy_n(s: &Scenario, contacts: &ContactSet) -> SolveResult {
    greedy_n_with(s, contacts, &GreedyNOptions::default())
}

/// Greedy followed by passes funded with the payments withheld from
/// excluded vehicles, until the freed money drops below `c_min` or a pass
/// retains nothing new.
pub fn greedy_n_with(s: &Scenario, contacts: &ContactSet, opts: &GreedyNOptions) -> SolveResult {
    let p = &s.params;
    let n_v = s.n_vehicles();
    let mut pool = alloc::vec![true; n_v];
    let mut retained: Vec<Transmission> = Vec::new();
    let mut lost: Vec<Transmission> = Vec::new();
    let mut budget_units = p.budget_units();
    let paid = alloc::vec![0u64; n_v];

    for round in 0.. {
        let committed: Vec<Transmission> = retained.iter().chain(&lost).copied().collect();
        let out = run_pass(s, contacts, &Pass { budget_units, pool: &pool, committed: &committed, paid_units: &paid });
        if round > 0 && out.retained.is_empty() {
            break;
        }
        for tx in &out.retained {
            pool[tx.vehicle] = false;
        }
        retained.extend(out.retained);
        let freed = out.excluded.len() as u64;
        if !opts.reclaim_excluded_units {
            lost.extend(out.excluded);
        }
        if freed == 0 || p.unit_cost.times(freed) < p.c_min {
            break;
        }
        budget_units = freed;
    }
    result_of(s, retained)
}
