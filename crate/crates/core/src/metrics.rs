//! Throughput, fairness gap, per-unit delays and the fairness-weight sweep.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geo::ContactSet;
use crate::ilp::{build_model_with, ModelOptions, ProblemKind};
use crate::model::{Scenario, Schedule, SolveResult};
use crate::units::{FairnessWeight, Money};

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub throughput_units: u64,
    pub fairness_gap_units: u64,
    /// One entry per transmitted unit, in canonical transmission order.
    pub per_unit_delays_s: Vec<f64>,
    pub total_spend: Money,
    pub participant_count: usize,
}

impl MetricsReport {
    pub fn of(s: &Scenario, r: &SolveResult) -> Result<Self> {
        Ok(MetricsReport {
            throughput_units: throughput(&r.schedule),
            fairness_gap_units: fairness_gap(&r.schedule, s),
            per_unit_delays_s: delays(&r.schedule, s)?,
            total_spend: r.total_spend,
            participant_count: r.participants.len(),
        })
    }

    pub fn max_delay_s(&self) -> Option<f64> {
        self.per_unit_delays_s.iter().copied().reduce(f64::max)
    }
}

pub fn throughput(sched: &Schedule) -> u64 {
    sched.len() as u64
}

/// Largest minus smallest per-sensor count, over every sensor of `s`.
pub fn fairness_gap(sched: &Schedule, s: &Scenario) -> u64 {
    let counts = sched.per_sensor_counts(s.n_sensors());
    match (counts.iter().max(), counts.iter().min()) {
        (Some(hi), Some(lo)) => hi - lo,
        _ => 0,
    }
}

/// Delay of every unit: units leave each sensor first-in first-out, so the
/// `k`-th unit sent by a sensor was generated at `k / rate` and its delay is
/// `slot - k / rate`.
pub fn delays(sched: &Schedule, s: &Scenario) -> Result<Vec<f64>> {
    let p = &s.params;
    let (num, den) = (p.gen_rate.num() as f64, p.gen_rate.den() as f64);
    let mut sent = alloc::vec![0u64; s.n_sensors()];
    let mut out = Vec::with_capacity(sched.len());
    for tx in sched.iter() {
        let k = sent.get_mut(tx.sensor).ok_or(Error::UnknownSensor(tx.sensor))?;
        *k += 1;
        if *k > p.buffer_cap(tx.slot) {
            return Err(Error::CausalityViolation { sensor: tx.sensor, slot: tx.slot, unit: *k });
        }
        out.push(tx.slot as f64 - *k as f64 * den / num);
    }
    Ok(out)
}

/// Empirical CDF: each distinct delay with the fraction of units at or
/// below it.
pub fn delay_cdf(delays: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = delays.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &d) in sorted.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == d => last.1 = frac,
            _ => out.push((d, frac)),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub weight: FairnessWeight,
    /// Throughput over `|S||V||T|`.
    pub throughput_term: f64,
    /// Fairness gap over `|V||T|`.
    pub gap_term: f64,
    pub objective: f64,
    pub result: SolveResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub selected: FairnessWeight,
    pub rows: Vec<SweepRow>,
}

/// Solves the fairness problem (or its delay-bounded variant, following
/// `base`) at every weight in `grid` and selects the weight with the largest
/// objective, the smallest weight on ties.
pub fn sweep_fairness<F>(
    s: &Scenario,
    contacts: &ContactSet,
    base: ProblemKind,
    grid: &[FairnessWeight],
    opts: &ModelOptions,
    mut solve: F,
) -> Result<SweepOutcome>
where
    F: FnMut(&crate::ilp::LinearModel) -> Result<SolveResult>,
{
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty fairness grid".into()));
    }
    let mut grid = grid.to_vec();
    grid.sort();
    grid.dedup();

    let mut rows = Vec::with_capacity(grid.len());
    let mut best: Option<(usize, (i128, i128))> = None;
    for (i, &w) in grid.iter().enumerate() {
        let m = build_model_with(s, contacts, base.with_weight(w), opts)?;
        let result = solve(&m)?;
        let (throughput_term, gap_term) = m.normalized_terms(&result.schedule);
        let exact = m.exact_objective(&result.schedule);
        // strictly larger only, so the smallest weight keeps ties
        let better = match best {
            None => true,
            Some((_, (bn, bd))) => exact.0 * bd > bn * exact.1,
        };
        if better {
            best = Some((i, exact));
        }
        rows.push(SweepRow { weight: w, throughput_term, gap_term, objective: result.objective_value, result });
    }
    let selected = grid[best.expect("grid is non-empty").0];
    Ok(SweepOutcome { selected, rows })
}
