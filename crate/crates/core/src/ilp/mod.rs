//! 0-1 programs for relay scheduling and their exact solvers.
//!
//! [`build_model`] produces a solver-agnostic [`LinearModel`]: one binary per
//! contact event (out-of-range triples have no variable), one participation
//! binary per vehicle and, for the fairness objectives, the `z_max`/`z_min`
//! bounds on per-sensor counts. The model doubles as the input of the
//! branch-and-bound solver ([`solve_exact`]), the brute-force oracle
//! ([`solve_bruteforce`]) and the LP text writer ([`lp_format`]).

mod bnb;
mod brute;
mod decode;
pub mod lp_format;

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geo::ContactSet;
use crate::model::{ParamSet, Scenario, Schedule, Transmission};
use crate::units::{DelayLimit, FairnessWeight};

pub use bnb::{solve_exact, solve_exact_with_clock, Clock, NoClock, SolveOptions};
#[cfg(feature = "std")]
pub use bnb::StdClock;
pub use brute::{solve_bruteforce, BRUTE_FORCE_CAP};
pub use decode::decode_solution;

/// Which of the three scheduling problems to build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind {
    /// Maximize the number of relayed units.
    Cspv,
    /// Weighted throughput minus weighted fairness gap.
    FairCspv { weight: FairnessWeight },
    /// [`ProblemKind::FairCspv`] with a per-unit delay limit.
    DelayFairCspv { weight: FairnessWeight, delay: DelayLimit },
}

impl ProblemKind {
    pub fn fair(weight: FairnessWeight) -> Self {
        ProblemKind::FairCspv { weight }
    }

    pub fn delay_fair(weight: FairnessWeight, bound_s: f64, tolerance: f64) -> Result<Self> {
        Ok(ProblemKind::DelayFairCspv { weight, delay: DelayLimit::new(bound_s, tolerance)? })
    }

    /// Builds the kind named `name` (`cspv`, `fcspv` or `dfcspv`) from the
    /// weight, delay bound and tolerance stored in `p`.
    pub fn from_params(name: &str, p: &ParamSet) -> Result<Self> {
        match name {
            "cspv" => Ok(ProblemKind::Cspv),
            "fcspv" => Ok(ProblemKind::fair(p.fairness_weight)),
            "dfcspv" => {
                let bound = p
                    .delay_bound_s
                    .ok_or_else(|| Error::InvalidParameter("dfcspv needs a delay bound".into()))?;
                Self::delay_fair(p.fairness_weight, bound, p.delay_tolerance.unwrap_or(0.0))
            }
            other => Err(Error::InvalidParameter(format!("unknown problem kind `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Cspv => "cspv",
            ProblemKind::FairCspv { .. } => "fcspv",
            ProblemKind::DelayFairCspv { .. } => "dfcspv",
        }
    }

    pub fn weight(&self) -> Option<FairnessWeight> {
        match *self {
            ProblemKind::Cspv => None,
            ProblemKind::FairCspv { weight } | ProblemKind::DelayFairCspv { weight, .. } => Some(weight),
        }
    }

    pub fn delay(&self) -> Option<DelayLimit> {
        match *self {
            ProblemKind::DelayFairCspv { delay, .. } => Some(delay),
            _ => None,
        }
    }

    pub fn with_weight(self, weight: FairnessWeight) -> Self {
        match self {
            ProblemKind::Cspv | ProblemKind::FairCspv { .. } => ProblemKind::FairCspv { weight },
            ProblemKind::DelayFairCspv { delay, .. } => ProblemKind::DelayFairCspv { weight, delay },
        }
    }
}

/// Switches on top of the base formulation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelOptions {
    /// At most one sensor per vehicle per slot, as the greedy baseline assumes.
    pub vehicle_exclusive: bool,
    /// Measure the fairness gap only over sensors with at least one contact.
    pub reachable_sensors_only: bool,
    /// Transmissions that must be part of every solution.
    pub fixed: Vec<Transmission>,
    /// Vehicles that may not relay anything.
    pub excluded_vehicles: BTreeSet<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v]).sum()
    }

    pub fn is_satisfied(&self, values: &[f64], tol: f64) -> bool {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => lhs <= self.rhs + tol,
            Sense::Ge => lhs >= self.rhs - tol,
            Sense::Eq => (lhs - self.rhs).abs() <= tol,
        }
    }
}

/// How model variables map back to schedule entities.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecodeMap {
    /// Variable `i` for `i < transmissions.len()` is the transmission
    /// `transmissions[i]`; they come first and in canonical order.
    pub transmissions: Vec<Transmission>,
    /// `(variable, vehicle)` participation indicators.
    pub participation: Vec<(usize, usize)>,
    pub z_max: Option<usize>,
    pub z_min: Option<usize>,
    /// `(variable, sensor, slot)`: units sent by `sensor` through `slot`.
    pub cumulative: Vec<(usize, usize, u32)>,
}

/// Problem data in the form the combinatorial solvers consume.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Instance {
    pub kind: ProblemKind,
    pub n_vehicles: usize,
    pub n_sensors: usize,
    pub horizon: u32,
    pub params: ParamSet,
    pub budget_units: u64,
    pub min_units: u64,
    pub max_units: Option<u64>,
    /// Inclusive bound on `slot * rate.num - unit * rate.den`.
    pub delay_limit: Option<i64>,
    pub vehicle_exclusive: bool,
    /// Sensors whose counts enter the fairness gap.
    pub gap_sensors: Vec<usize>,
    pub fixed: Vec<bool>,
}

impl Instance {
    /// `(numerator, denominator)` with `objective = numerator / denominator`.
    ///
    /// Throughput objective: `X / 1`. Fairness objectives with weight
    /// `a / b`: `(a X - (b - a) |S| G) / (b |S| |V| |T|)`.
    pub fn score(&self, throughput: u64, gap: u64) -> i128 {
        match self.kind.weight() {
            None => throughput as i128,
            Some(w) => {
                let (a, b) = (w.num() as i128, w.den() as i128);
                a * throughput as i128 - (b - a) * self.n_sensors as i128 * gap as i128
            }
        }
    }

    pub fn score_denominator(&self) -> i128 {
        match self.kind.weight() {
            None => 1,
            Some(w) => {
                let svt = self.n_sensors as i128 * self.n_vehicles as i128 * self.horizon as i128;
                w.den() as i128 * svt.max(1)
            }
        }
    }

    pub fn objective_from_score(&self, score: i128) -> f64 {
        score as f64 / self.score_denominator() as f64
    }

    pub fn gap_of_counts(&self, per_sensor: &[u64]) -> u64 {
        let mut it = self.gap_sensors.iter().map(|&j| per_sensor[j]);
        let Some(first) = it.next() else { return 0 };
        let (lo, hi) = it.fold((first, first), |(lo, hi), c| (lo.min(c), hi.max(c)));
        hi - lo
    }
}

/// A linear 0-1 program in maximization form.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub name: String,
    pub variables: Vec<Variable>,
    /// Sparse objective coefficients.
    pub objective: Vec<(usize, f64)>,
    pub constraints: Vec<Constraint>,
    pub decode: DecodeMap,
    pub(crate) instance: Instance,
}

impl LinearModel {
    pub fn kind(&self) -> ProblemKind {
        self.instance.kind
    }

    pub fn n_transmission_vars(&self) -> usize {
        self.decode.transmissions.len()
    }

    pub fn budget_units(&self) -> u64 {
        self.instance.budget_units
    }

    pub fn min_units_to_participate(&self) -> u64 {
        self.instance.min_units
    }

    pub fn params(&self) -> &ParamSet {
        &self.instance.params
    }

    pub fn constraint(&self, name: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.name == name)
    }

    pub fn objective_activity(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v]).sum()
    }

    /// Fairness gap of `sched` as this model measures it.
    pub fn gap_of(&self, sched: &Schedule) -> u64 {
        self.instance.gap_of_counts(&sched.per_sensor_counts(self.instance.n_sensors))
    }

    /// Objective of `sched` as an exact fraction `(numerator, denominator)`.
    pub fn exact_objective(&self, sched: &Schedule) -> (i128, i128) {
        let score = self.instance.score(sched.len() as u64, self.gap_of(sched));
        (score, self.instance.score_denominator())
    }

    /// `(throughput term, gap term)` of the fairness objective, both
    /// normalized as in the objective: `X / (|S||V||T|)` and `G / (|V||T|)`.
    pub fn normalized_terms(&self, sched: &Schedule) -> (f64, f64) {
        let i = &self.instance;
        let vt = (i.n_vehicles as f64 * i.horizon as f64).max(1.0);
        let svt = (vt * i.n_sensors as f64).max(1.0);
        (sched.len() as f64 / svt, self.gap_of(sched) as f64 / vt)
    }
}

/// Builds the model for `kind` with default options.
pub fn build_model(s: &Scenario, contacts: &ContactSet, kind: ProblemKind) -> Result<LinearModel> {
    build_model_with(s, contacts, kind, &ModelOptions::default())
}

pub fn build_model_with(s: &Scenario, contacts: &ContactSet, kind: ProblemKind, opts: &ModelOptions) -> Result<LinearModel> {
    let p = &s.params;
    if p.unit_cost <= crate::units::Money::ZERO {
        return Err(Error::InvalidParameter("unit cost must be positive".into()));
    }
    let (n_v, n_s, horizon) = (s.n_vehicles(), s.n_sensors(), s.horizon());

    let events: Vec<Transmission> = contacts
        .events()
        .iter()
        .filter(|e| !opts.excluded_vehicles.contains(&e.vehicle))
        .map(|e| Transmission::new(e.vehicle, e.sensor, e.slot))
        .collect();

    let mut fixed = alloc::vec![false; events.len()];
    for tx in &opts.fixed {
        let i = events
            .binary_search(tx)
            .map_err(|_| Error::InvalidParameter(format!("fixed transmission {tx:?} is not an available contact")))?;
        fixed[i] = true;
    }

    let mut variables = Vec::new();
    let mut constraints = Vec::new();
    let mut decode = DecodeMap { transmissions: events.clone(), ..DecodeMap::default() };

    for (tx, &f) in events.iter().zip(&fixed) {
        variables.push(Variable {
            name: format!("x_v{}_s{}_t{}", tx.vehicle, tx.sensor, tx.slot),
            kind: VarKind::Binary,
            lower: if f { 1.0 } else { 0.0 },
            upper: 1.0,
        });
    }

    let mut by_vehicle: Vec<Vec<usize>> = alloc::vec![Vec::new(); n_v];
    let mut by_sensor: Vec<Vec<usize>> = alloc::vec![Vec::new(); n_s];
    for (i, tx) in events.iter().enumerate() {
        by_vehicle[tx.vehicle].push(i);
        by_sensor[tx.sensor].push(i);
    }

    let budget_units = p.budget_units();
    let min_units = p.min_units_to_participate();
    let max_units = p.max_units_per_vehicle();

    // total payment within budget, expressed in units
    constraints.push(Constraint {
        name: "budget".into(),
        terms: (0..events.len()).map(|i| (i, 1.0)).collect(),
        sense: Sense::Le,
        rhs: budget_units as f64,
    });

    // one vehicle per sensor and slot
    let mut start = 0;
    while start < events.len() {
        let (slot, sensor) = (events[start].slot, events[start].sensor);
        let end = start + events[start..].iter().take_while(|e| e.slot == slot && e.sensor == sensor).count();
        if end - start > 1 {
            constraints.push(Constraint {
                name: format!("unicast_s{sensor}_t{slot}"),
                terms: (start..end).map(|i| (i, 1.0)).collect(),
                sense: Sense::Le,
                rhs: 1.0,
            });
        }
        start = end;
    }

    // buffer causality; rows that unicast already implies are skipped
    for (j, idx) in by_sensor.iter().enumerate() {
        let mut distinct_slots = 0u64;
        let mut k = 0;
        while k < idx.len() {
            let slot = events[idx[k]].slot;
            let end = k + idx[k..].iter().take_while(|&&i| events[i].slot == slot).count();
            distinct_slots += 1;
            let cap = p.buffer_cap(slot);
            if distinct_slots > cap {
                constraints.push(Constraint {
                    name: format!("buffer_s{j}_t{slot}"),
                    terms: idx[..end].iter().map(|&i| (i, 1.0)).collect(),
                    sense: Sense::Le,
                    rhs: cap as f64,
                });
            }
            k = end;
        }
    }

    // participation: y_v = 1 iff v relays, and then at least min_units
    for (v, idx) in by_vehicle.iter().enumerate() {
        if idx.is_empty() {
            continue;
        }
        let y = variables.len();
        variables.push(Variable { name: format!("y_v{v}"), kind: VarKind::Binary, lower: 0.0, upper: 1.0 });
        decode.participation.push((y, v));
        let upper = idx.len() as f64;
        let mut hi: Vec<(usize, f64)> = idx.iter().map(|&i| (i, 1.0)).collect();
        hi.push((y, -upper));
        constraints.push(Constraint { name: format!("part_hi_v{v}"), terms: hi, sense: Sense::Le, rhs: 0.0 });
        let mut lo: Vec<(usize, f64)> = idx.iter().map(|&i| (i, 1.0)).collect();
        lo.push((y, -(min_units as f64)));
        constraints.push(Constraint { name: format!("part_lo_v{v}"), terms: lo, sense: Sense::Ge, rhs: 0.0 });
        if let Some(cap) = max_units {
            constraints.push(Constraint {
                name: format!("cap_v{v}"),
                terms: idx.iter().map(|&i| (i, 1.0)).collect(),
                sense: Sense::Le,
                rhs: cap as f64,
            });
        }
    }

    if opts.vehicle_exclusive {
        for (v, idx) in by_vehicle.iter().enumerate() {
            let mut slots: Vec<(u32, usize)> = idx.iter().map(|&i| (events[i].slot, i)).collect();
            slots.sort_unstable();
            let mut k = 0;
            while k < slots.len() {
                let slot = slots[k].0;
                let end = k + slots[k..].iter().take_while(|s| s.0 == slot).count();
                if end - k > 1 {
                    constraints.push(Constraint {
                        name: format!("excl_v{v}_t{slot}"),
                        terms: slots[k..end].iter().map(|&(_, i)| (i, 1.0)).collect(),
                        sense: Sense::Le,
                        rhs: 1.0,
                    });
                }
                k = end;
            }
        }
    }

    let gap_sensors: Vec<usize> =
        (0..n_s).filter(|&j| !opts.reachable_sensors_only || !contacts.of_sensor(j).is_empty()).collect();

    let mut objective = Vec::new();
    match kind.weight() {
        None => objective.extend((0..events.len()).map(|i| (i, 1.0))),
        Some(w) => {
            let vt = (n_v as f64 * horizon as f64).max(1.0);
            let svt = (vt * n_s as f64).max(1.0);
            let wx = w.as_f64() / svt;
            let wz = (1.0 - w.as_f64()) / vt;
            objective.extend((0..events.len()).map(|i| (i, wx)));

            let z_max = variables.len();
            variables.push(Variable { name: "z_max".into(), kind: VarKind::Continuous, lower: 0.0, upper: horizon as f64 });
            let z_min = variables.len();
            variables.push(Variable { name: "z_min".into(), kind: VarKind::Continuous, lower: 0.0, upper: horizon as f64 });
            decode.z_max = Some(z_max);
            decode.z_min = Some(z_min);
            objective.push((z_max, -wz));
            objective.push((z_min, wz));
            for &j in &gap_sensors {
                let mut terms = alloc::vec![(z_max, 1.0)];
                terms.extend(by_sensor[j].iter().map(|&i| (i, -1.0)));
                constraints.push(Constraint { name: format!("zmax_s{j}"), terms, sense: Sense::Ge, rhs: 0.0 });
            }
            for &j in &gap_sensors {
                let mut terms = alloc::vec![(z_min, 1.0)];
                terms.extend(by_sensor[j].iter().map(|&i| (i, -1.0)));
                constraints.push(Constraint { name: format!("zmin_s{j}"), terms, sense: Sense::Le, rhs: 0.0 });
            }
        }
    }

    let delay_limit = kind.delay().map(|d| d.scaled_limit(p.gen_rate));
    if let Some(limit) = delay_limit {
        // c_{j,t} counts units sent by j through t; chained per sensor so
        // every delay row stays short.
        let (num, den) = (p.gen_rate.num() as f64, p.gen_rate.den() as f64);
        for (j, idx) in by_sensor.iter().enumerate() {
            let mut prev: Option<usize> = None;
            let mut k = 0;
            while k < idx.len() {
                let slot = events[idx[k]].slot;
                let end = k + idx[k..].iter().take_while(|&&i| events[i].slot == slot).count();
                let c = variables.len();
                variables.push(Variable {
                    name: format!("c_s{j}_t{slot}"),
                    kind: VarKind::Continuous,
                    lower: 0.0,
                    upper: horizon as f64,
                });
                decode.cumulative.push((c, j, slot));
                let mut terms = alloc::vec![(c, 1.0)];
                if let Some(pc) = prev {
                    terms.push((pc, -1.0));
                }
                terms.extend(idx[k..end].iter().map(|&i| (i, -1.0)));
                constraints.push(Constraint { name: format!("cum_s{j}_t{slot}"), terms, sense: Sense::Eq, rhs: 0.0 });
                for &i in &idx[k..end] {
                    let v = events[i].vehicle;
                    constraints.push(Constraint {
                        name: format!("delay_v{v}_s{j}_t{slot}"),
                        terms: alloc::vec![(i, slot as f64 * num), (c, -den)],
                        sense: Sense::Le,
                        rhs: limit as f64,
                    });
                }
                prev = Some(c);
                k = end;
            }
        }
    }

    let instance = Instance {
        kind,
        n_vehicles: n_v,
        n_sensors: n_s,
        horizon,
        params: p.clone(),
        budget_units,
        min_units,
        max_units,
        delay_limit,
        vehicle_exclusive: opts.vehicle_exclusive,
        gap_sensors,
        fixed,
    };

    Ok(LinearModel { name: String::from(kind.name()), variables, objective, constraints, decode, instance })
}
