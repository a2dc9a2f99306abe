//! Depth-first branch-and-bound over `(sensor, slot)` decisions.
//!
//! The search walks the slots chronologically; at each `(slot, sensor)` pair
//! it either picks one in-range vehicle or leaves the sensor idle. Because
//! every earlier slot is already decided, buffer causality and the delay of a
//! new unit are checked exactly when it is placed. Subtrees are cut by
//!
//! * participation: a vehicle that started relaying must still be able to
//!   reach the minimum within its remaining contacts and the budget,
//! * an upper bound on further units: the least of the remaining budget, the
//!   per-sensor remaining slots clipped by end-of-horizon buffer capacity and
//!   the per-vehicle remaining contacts of vehicles that can still qualify,
//! * for the fairness objectives, the same bound traded against the gap:
//!   the smallest count any gap sensor can reach caps the final minimum, and
//!   units beyond `k` times the final maximum cannot sit on the `k` gap
//!   sensors.

use alloc::vec::Vec;

use super::decode::{assignment_for, decode_solution};
use super::{Instance, LinearModel};
use crate::error::{Error, Result};
use crate::model::SolveResult;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveOptions {
    pub time_limit_s: Option<f64>,
    pub node_limit: Option<u64>,
}

/// Elapsed-time source for time limits and statistics.
pub trait Clock {
    fn elapsed_s(&self) -> f64;
}

/// Reports zero elapsed time; time limits never fire.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed_s(&self) -> f64 {
        0.0
    }
}

#[cfg(feature = "std")]
#[derive(Debug, Clone, Copy)]
pub struct StdClock(std::time::Instant);

#[cfg(feature = "std")]
impl StdClock {
    pub fn start() -> Self {
        StdClock(std::time::Instant::now())
    }
}

#[cfg(feature = "std")]
impl Clock for StdClock {
    fn elapsed_s(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Solves `m` to proven optimality unless a limit is hit first, in which case
/// the best schedule found is returned with `proven_optimal = false`.
pub fn solve_exact(m: &LinearModel, opts: &SolveOptions) -> Result<SolveResult> {
    #[cfg(feature = "std")]
    {
        solve_exact_with_clock(m, opts, &StdClock::start())
    }
    #[cfg(not(feature = "std"))]
    {
        solve_exact_with_clock(m, opts, &NoClock)
    }
}

pub fn solve_exact_with_clock(m: &LinearModel, opts: &SolveOptions, clock: &dyn Clock) -> Result<SolveResult> {
    let mut search = Search::new(m, opts, clock);
    search.run();
    let Some((score, chosen)) = search.best.take() else {
        return Err(Error::Infeasible("fixed transmissions admit no feasible schedule".into()));
    };
    let inst = &m.instance;
    let assignment = assignment_for(m, &chosen);
    let mut result = decode_solution(m, &assignment)?;
    let objective = inst.objective_from_score(score);
    if result.objective_value != objective {
        return Err(Error::Inconsistent("decoded objective differs from search objective".into()));
    }
    let proven = !search.aborted;
    result.stats = crate::model::SolverStats {
        nodes_explored: search.nodes,
        wall_time_s: clock.elapsed_s(),
        proven_optimal: proven,
        dual_bound: if proven {
            objective
        } else {
            inst.objective_from_score(search.root_bound.unwrap_or(score).max(score))
        },
    };
    Ok(result)
}

struct Group {
    slot: u32,
    sensor: usize,
    /// `(variable, vehicle)` in branching order.
    options: Vec<(usize, usize)>,
    forced: bool,
}

struct Frame {
    group: usize,
    next_branch: usize,
    applied: Option<Applied>,
}

#[derive(Clone, Copy)]
struct Applied {
    var: usize,
    vehicle: usize,
    prev_busy: Option<u32>,
}

struct Search<'a> {
    inst: &'a Instance,
    opts: SolveOptions,
    clock: &'a dyn Clock,
    groups: Vec<Group>,
    /// Buffer capacity at each sensor's last contact slot.
    end_cap: Vec<u64>,
    count_v: Vec<u64>,
    cum_j: Vec<u64>,
    rem_v: Vec<u64>,
    rem_j: Vec<u64>,
    busy_v: Vec<Option<u32>>,
    total: u64,
    chosen: Vec<usize>,
    best: Option<(i128, Vec<usize>)>,
    root_bound: Option<i128>,
    nodes: u64,
    aborted: bool,
}

impl<'a> Search<'a> {
    fn new(m: &'a LinearModel, opts: &SolveOptions, clock: &'a dyn Clock) -> Self {
        let inst = &m.instance;
        let events = &m.decode.transmissions;

        let mut contacts_per_vehicle = alloc::vec![0u64; inst.n_vehicles];
        for tx in events {
            contacts_per_vehicle[tx.vehicle] += 1;
        }

        let mut groups = Vec::new();
        let mut start = 0;
        while start < events.len() {
            let (slot, sensor) = (events[start].slot, events[start].sensor);
            let end = start + events[start..].iter().take_while(|e| e.slot == slot && e.sensor == sensor).count();
            let forced: Vec<usize> = (start..end).filter(|&i| inst.fixed[i]).collect();
            let mut options: Vec<(usize, usize)> = if forced.is_empty() {
                (start..end).map(|i| (i, events[i].vehicle)).collect()
            } else {
                forced.iter().map(|&i| (i, events[i].vehicle)).collect()
            };
            // more contacts first: fewer vehicles needed to spend the budget
            options.sort_by_key(|&(_, v)| (core::cmp::Reverse(contacts_per_vehicle[v]), v));
            groups.push(Group { slot, sensor, options, forced: !forced.is_empty() });
            start = end;
        }

        let mut rem_v = alloc::vec![0u64; inst.n_vehicles];
        let mut rem_j = alloc::vec![0u64; inst.n_sensors];
        let mut end_cap = alloc::vec![0u64; inst.n_sensors];
        for g in &groups {
            rem_j[g.sensor] += 1;
            end_cap[g.sensor] = inst.params.buffer_cap(g.slot);
            for &(_, v) in &g.options {
                rem_v[v] += 1;
            }
        }

        let any_fixed = inst.fixed.iter().any(|&f| f);
        let best = if any_fixed { None } else { Some((inst.score(0, 0), Vec::new())) };

        Search {
            inst,
            opts: *opts,
            clock,
            groups,
            end_cap,
            count_v: alloc::vec![0; inst.n_vehicles],
            cum_j: alloc::vec![0; inst.n_sensors],
            rem_v,
            rem_j,
            busy_v: alloc::vec![None; inst.n_vehicles],
            total: 0,
            chosen: Vec::new(),
            best,
            root_bound: None,
            nodes: 0,
            aborted: false,
        }
    }

    fn run(&mut self) {
        let mut stack: Vec<Frame> = Vec::new();
        if self.enter(0) {
            stack.push(Frame { group: 0, next_branch: 0, applied: None });
        }
        while let Some(top) = stack.len().checked_sub(1) {
            if self.aborted {
                break;
            }
            let g = stack[top].group;
            if let Some(a) = stack[top].applied.take() {
                self.undo(g, a);
            }
            let n_branches = self.groups[g].options.len() + usize::from(!self.groups[g].forced);
            let mut descended = false;
            while stack[top].next_branch < n_branches {
                let b = stack[top].next_branch;
                stack[top].next_branch += 1;
                let applied = if b < self.groups[g].options.len() {
                    match self.try_apply(g, b) {
                        Some(a) => Some(a),
                        None => continue,
                    }
                } else {
                    None
                };
                if self.enter(g + 1) {
                    stack[top].applied = applied;
                    stack.push(Frame { group: g + 1, next_branch: 0, applied: None });
                    descended = true;
                    break;
                }
                if let Some(a) = applied {
                    self.undo(g, a);
                }
                if self.aborted {
                    break;
                }
            }
            if !descended {
                self.leave(g);
                stack.pop();
            }
        }
    }

    fn try_apply(&mut self, g: usize, b: usize) -> Option<Applied> {
        let inst = self.inst;
        let group = &self.groups[g];
        let (var, vehicle) = group.options[b];
        let (j, slot) = (group.sensor, group.slot);
        if self.total + 1 > inst.budget_units {
            return None;
        }
        let unit = self.cum_j[j] + 1;
        if unit > inst.params.buffer_cap(slot) {
            return None;
        }
        if let Some(limit) = inst.delay_limit {
            let rate = inst.params.gen_rate;
            let lhs = slot as i64 * rate.num() as i64 - unit as i64 * rate.den() as i64;
            if lhs > limit {
                return None;
            }
        }
        if let Some(cap) = inst.max_units {
            if self.count_v[vehicle] + 1 > cap {
                return None;
            }
        }
        let prev_busy = self.busy_v[vehicle];
        if inst.vehicle_exclusive && prev_busy == Some(slot) {
            return None;
        }
        self.busy_v[vehicle] = Some(slot);
        self.count_v[vehicle] += 1;
        self.cum_j[j] += 1;
        self.total += 1;
        self.chosen.push(var);
        Some(Applied { var, vehicle, prev_busy })
    }

    fn undo(&mut self, g: usize, a: Applied) {
        let j = self.groups[g].sensor;
        self.busy_v[a.vehicle] = a.prev_busy;
        self.count_v[a.vehicle] -= 1;
        self.cum_j[j] -= 1;
        self.total -= 1;
        let popped = self.chosen.pop();
        debug_assert_eq!(popped, Some(a.var));
    }

    /// Evaluates node `g` (groups `g..` undecided). Returns whether to expand
    /// it; leaves are scored here and never expanded.
    fn enter(&mut self, g: usize) -> bool {
        self.nodes += 1;
        if self.nodes.is_multiple_of(1024) {
            let over_time = self.opts.time_limit_s.is_some_and(|lim| self.clock.elapsed_s() >= lim);
            let over_nodes = self.opts.node_limit.is_some_and(|lim| self.nodes >= lim);
            if over_time || over_nodes {
                self.aborted = true;
                return false;
            }
        }

        let inst = self.inst;
        let k = inst.min_units;
        let remaining_budget = inst.budget_units - self.total;

        let mut deficit = 0u64;
        for v in 0..inst.n_vehicles {
            let c = self.count_v[v];
            if c > 0 && c < k {
                let need = k - c;
                if self.rem_v[v] < need {
                    return false;
                }
                deficit += need;
            }
        }
        if deficit > remaining_budget {
            return false;
        }

        if g == self.groups.len() {
            self.record_leaf();
            return false;
        }

        let bound = self.upper_bound(remaining_budget);
        if self.root_bound.is_none() {
            self.root_bound = Some(bound);
        }
        if let Some((best, _)) = &self.best {
            if bound <= *best {
                return false;
            }
        }

        let group = &self.groups[g];
        self.rem_j[group.sensor] -= 1;
        for &(_, v) in &group.options {
            self.rem_v[v] -= 1;
        }
        true
    }

    fn leave(&mut self, g: usize) {
        let group = &self.groups[g];
        self.rem_j[group.sensor] += 1;
        for &(_, v) in &group.options {
            self.rem_v[v] += 1;
        }
    }

    fn sensor_potential(&self, j: usize, remaining_budget: u64) -> u64 {
        let cap_left = self.end_cap[j].saturating_sub(self.cum_j[j]);
        self.rem_j[j].min(cap_left).min(remaining_budget)
    }

    fn upper_bound(&self, remaining_budget: u64) -> i128 {
        let inst = self.inst;
        let by_sensor: u64 = (0..inst.n_sensors).map(|j| self.sensor_potential(j, remaining_budget)).sum();
        let k = inst.min_units;
        let by_vehicle: u64 = (0..inst.n_vehicles)
            .map(|v| {
                let (c, r) = (self.count_v[v], self.rem_v[v]);
                if c == 0 && r < k {
                    return 0;
                }
                let room = inst.max_units.map_or(u64::MAX, |cap| cap.saturating_sub(c));
                r.min(room)
            })
            .sum();
        let extra = remaining_budget.min(by_sensor).min(by_vehicle);
        let x_ub = self.total + extra;

        if inst.kind.weight().is_none() || inst.gap_sensors.is_empty() {
            return inst.score(x_ub, 0);
        }
        // Relaxation over the final largest gap-sensor count M >= hi:
        // gap >= M - lo and X <= min(x_ub, others + k M). Concave and
        // piecewise linear in M, so a breakpoint is optimal. Scaled by k.
        let mut in_gap = alloc::vec![false; inst.n_sensors];
        for &j in &inst.gap_sensors {
            in_gap[j] = true;
        }
        let reach = |j: usize| (self.cum_j[j] + self.sensor_potential(j, remaining_budget)) as i128;
        let hi = inst.gap_sensors.iter().map(|&j| self.cum_j[j]).max().unwrap_or(0) as i128;
        let lo = inst.gap_sensors.iter().map(|&j| reach(j)).min().unwrap_or(0);
        let others: i128 = (0..inst.n_sensors).filter(|&j| !in_gap[j]).map(reach).sum();
        let k = inst.gap_sensors.len() as i128;
        let (a, c) = (inst.score(1, 0), -inst.score(0, 1));
        let x_ub = x_ub as i128;
        let f = |mk: i128| a * k * x_ub.min(others + mk) - c * (mk - k * lo).max(0);
        let scaled = [k * hi, k * lo, x_ub - others].into_iter().map(|mk| f(mk.max(k * hi))).max().expect("three candidates");
        scaled.div_euclid(k)
    }

    fn record_leaf(&mut self) {
        let inst = self.inst;
        let k = inst.min_units;
        if self.count_v.iter().any(|&c| c > 0 && c < k) {
            return;
        }
        let score = inst.score(self.total, inst.gap_of_counts(&self.cum_j));
        let better = match &self.best {
            None => true,
            Some((best, best_set)) => {
                score > *best || (score == *best && {
                    let mut mine = self.chosen.clone();
                    mine.sort_unstable();
                    mine < *best_set
                })
            }
        };
        if better {
            let mut set = self.chosen.clone();
            set.sort_unstable();
            self.best = Some((score, set));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::extract_contacts;
    use crate::ilp::testutil::*;
    use crate::ilp::{build_model, build_model_with, ModelOptions, ProblemKind};
    use crate::model::{Transmission, VehicleTrajectory};
    use crate::units::FairnessWeight;
    use alloc::vec;

    #[test]
    fn t1_cspv_optimum() {
        let s = t1();
        let m = build_model(&s, &extract_contacts(&s), ProblemKind::Cspv).unwrap();
        let r = solve_exact(&m, &SolveOptions::default()).unwrap();
        assert_eq!(r.throughput(), 5);
        assert_eq!(r.total_spend, dollars(5.0));
        assert_eq!(r.participants.len(), 1);
        assert!(r.stats.proven_optimal);
        assert_eq!(r.objective_value, 5.0);
        let slots: Vec<u32> = r.schedule.iter().map(|t| t.slot).collect();
        assert_eq!(slots, vec![3, 4, 5, 6, 7]);
    }

    #[test]
    fn budget_below_threshold_gives_empty_schedule() {
        let mut s = t1();
        // threshold is 3 units ($3), budget only $2.5
        s.params.c_max = dollars(2.5);
        let m = build_model(&s, &extract_contacts(&s), ProblemKind::Cspv).unwrap();
        let r = solve_exact(&m, &SolveOptions::default()).unwrap();
        assert!(r.schedule.is_empty());
        assert_eq!(r.objective_value, 0.0);
    }

    #[test]
    fn zero_weight_reaches_zero_gap() {
        let mut s = t1();
        s.sensors.push(crate::model::Sensor::new("far", 45.0, 100.0));
        let m = build_model(&s, &extract_contacts(&s), ProblemKind::fair(FairnessWeight::ZERO)).unwrap();
        let r = solve_exact(&m, &SolveOptions::default()).unwrap();
        assert_eq!(r.objective_value, 0.0);
        assert_eq!(m.gap_of(&r.schedule), 0);
    }

    #[test]
    fn fixed_transmissions_are_kept() {
        let mut s = t1();
        s.vehicles.push(VehicleTrajectory::stationary("v1", near(50.0), 0.0, 9.0));
        s.params.c_max = dollars(10.0);
        let c = extract_contacts(&s);
        let fixed = vec![Transmission::new(1, 0, 0), Transmission::new(1, 0, 1), Transmission::new(1, 0, 2)];
        let opts = ModelOptions { fixed: fixed.clone(), ..ModelOptions::default() };
        let m = build_model_with(&s, &c, ProblemKind::Cspv, &opts).unwrap();
        let r = solve_exact(&m, &SolveOptions::default()).unwrap();
        assert!(fixed.iter().all(|t| r.schedule.contains(t)));
        assert_eq!(r.throughput(), 10);
    }

    #[test]
    fn node_limit_reports_incumbent() {
        let mut s = t1();
        s.grid.horizon_slots = 60;
        for i in 0..6 {
            s.vehicles.push(VehicleTrajectory::stationary(alloc::format!("w{i}"), near(20.0 * i as f64), 0.0, 59.0));
        }
        s.params.c_max = dollars(40.0);
        s.params.c_min = dollars(6.0);
        let m = build_model(&s, &extract_contacts(&s), ProblemKind::Cspv).unwrap();
        let r = solve_exact(&m, &SolveOptions { node_limit: Some(2048), ..SolveOptions::default() }).unwrap();
        assert!(r.stats.dual_bound >= r.objective_value);
        if !r.stats.proven_optimal {
            assert!(r.stats.nodes_explored <= 2048 + 1);
        }
    }
}
