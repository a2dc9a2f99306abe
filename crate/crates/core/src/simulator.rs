//! No-show experiments and the direct-subscription cost baseline.
//!
//! Random draws come from ChaCha8 seeded with the configured seed: one
//! uniform draw in `[0, 1)` per planned participant, in increasing vehicle
//! index order; the vehicle shows up iff its draw is below the rate.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geo::ContactSet;
use crate::greedy::{run_pass, Pass};
use crate::ilp::{build_model_with, solve_exact, ModelOptions, ProblemKind, SolveOptions};
use crate::metrics::MetricsReport;
use crate::model::{Scenario, Schedule, SolveResult, SolverStats};
use crate::units::Money;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenetrationConfig {
    /// Probability that a planned vehicle shows up.
    pub rate: f64,
    pub rng_seed: u64,
    /// Replace missing vehicles with backups after the no-shows are known.
    pub recompute: bool,
}

impl PenetrationConfig {
    pub fn new(rate: f64, rng_seed: u64, recompute: bool) -> Result<Self> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::InvalidParameter("penetration rate must lie in [0, 1]".into()));
        }
        Ok(PenetrationConfig { rate, rng_seed, recompute })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub planned: SolveResult,
    pub realized: Schedule,
    pub realized_metrics: MetricsReport,
    pub no_show_vehicles: BTreeSet<usize>,
}

/// Re-planner used after no-shows.
#[derive(Debug, Clone, PartialEq)]
pub enum Replanner {
    /// Exact solve of `kind` with the surviving transmissions fixed.
    Exact { kind: ProblemKind, options: SolveOptions },
    /// One greedy pass around the surviving transmissions.
    Greedy,
}

/// Draws the no-show set and drops those vehicles' transmissions; with
/// `cfg.recompute`, backups are then scheduled with `replanner`.
pub fn run_penetration(
    plan: &SolveResult,
    cfg: &PenetrationConfig,
    s: &Scenario,
    contacts: &ContactSet,
    replanner: &Replanner,
) -> Result<ExperimentOutcome> {
    let outcome = apply_penetration(plan, cfg, s)?;
    if cfg.recompute {
        recompute_with_backups(&outcome, s, contacts, replanner)
    } else {
        Ok(outcome)
    }
}

/// Removes the transmissions of planned participants that do not show up.
pub fn apply_penetration(plan: &SolveResult, cfg: &PenetrationConfig, s: &Scenario) -> Result<ExperimentOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut no_show = BTreeSet::new();
    for v in plan.schedule.vehicles() {
        let draw: f64 = rng.random();
        if !(draw < cfg.rate) {
            no_show.insert(v);
        }
    }
    let realized = plan.schedule.filtered(|tx| !no_show.contains(&tx.vehicle));
    outcome(plan.clone(), realized, no_show, s)
}

fn outcome(planned: SolveResult, realized: Schedule, no_show: BTreeSet<usize>, s: &Scenario) -> Result<ExperimentOutcome> {
    let realized_result = SolveResult::from_schedule(realized.clone(), &s.params, 0.0, SolverStats::default());
    let realized_metrics = MetricsReport::of(s, &realized_result)?;
    Ok(ExperimentOutcome { planned, realized, realized_metrics, no_show_vehicles: no_show })
}

/// Schedules backup vehicles with the money the no-shows did not earn.
///
/// Transmissions of vehicles that showed up stay as they are; no-show
/// vehicles are never used. Every other vehicle, including those that were
/// not in the plan, may take new transmissions. When the surviving
/// transmissions admit no feasible completion (or the exact search finds
/// none within its limits) they are returned unchanged.
pub fn recompute_with_backups(
    after: &ExperimentOutcome,
    s: &Scenario,
    contacts: &ContactSet,
    replanner: &Replanner,
) -> Result<ExperimentOutcome> {
    if after.no_show_vehicles.is_empty() {
        return Ok(after.clone());
    }
    let committed: Vec<_> = after.realized.iter().copied().collect();
    let realized = match replanner {
        Replanner::Exact { kind, options } => {
            let opts = ModelOptions {
                fixed: committed,
                excluded_vehicles: after.no_show_vehicles.clone(),
                ..ModelOptions::default()
            };
            let m = build_model_with(s, contacts, *kind, &opts)?;
            match solve_exact(&m, options) {
                Ok(r) => r.schedule,
                // dropping units raises the delay of later units from the
                // same sensor, so survivors may break a delay bound
                Err(Error::Infeasible(_)) => after.realized.clone(),
                Err(e) => return Err(e),
            }
        }
        Replanner::Greedy => {
            let n_v = s.n_vehicles();
            let pool: Vec<bool> = (0..n_v).map(|v| !after.no_show_vehicles.contains(&v)).collect();
            let paid = after.realized.per_vehicle_counts(n_v);
            let budget_units = s.params.budget_units().saturating_sub(committed.len() as u64);
            let pass = Pass { budget_units, pool: &pool, committed: &committed, paid_units: &paid };
            let out = run_pass(s, contacts, &pass);
            Schedule::from_transmissions(committed.iter().copied().chain(out.retained))?
        }
    };
    outcome(after.planned.clone(), realized, after.no_show_vehicles.clone(), s)
}

/// Units the direct channel delivers for `spend` at `price_per_mb`.
pub fn baseline_units(spend: Money, price_per_mb: Money, unit_size_bytes: u32) -> Result<u64> {
    if spend < Money::ZERO {
        return Err(Error::InvalidParameter("spend must be non-negative".into()));
    }
    if price_per_mb <= Money::ZERO || unit_size_bytes == 0 {
        return Err(Error::InvalidParameter("direct price and unit size must be positive".into()));
    }
    // spend / (price * size / 2^20), kept exact
    let num = spend.ticks() as i128 * (1 << 20);
    let den = price_per_mb.ticks() as i128 * unit_size_bytes as i128;
    Ok((num / den) as u64)
}

/// Relayed throughput against what the same money buys directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostComparison {
    pub relayed_units: u64,
    pub direct_units: u64,
}

impl CostComparison {
    /// `relayed / direct`; 1 when both are zero, infinite when only the
    /// direct count is.
    pub fn ratio(&self) -> f64 {
        match (self.relayed_units, self.direct_units) {
            (0, 0) => 1.0,
            (_, 0) => f64::INFINITY,
            (r, d) => r as f64 / d as f64,
        }
    }
}

pub fn cost_comparison(plan: &SolveResult, s: &Scenario, direct_price_per_mb: Money) -> Result<CostComparison> {
    Ok(CostComparison {
        relayed_units: plan.throughput(),
        direct_units: baseline_units(plan.total_spend, direct_price_per_mb, s.params.unit_size_bytes)?,
    })
}
