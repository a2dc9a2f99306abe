//! Turning a variable assignment back into a schedule.

use alloc::format;
use alloc::vec::Vec;

use super::{LinearModel, VarKind};
use crate::error::{Error, Result};
use crate::model::{participants_of, Schedule, SolveResult, SolverStats};

const TOL: f64 = 1e-9;

/// Full variable assignment for a set of chosen transmission variables, with
/// participation, gap bounds and cumulative counts at their tight values.
pub(crate) fn assignment_for(m: &LinearModel, chosen: &[usize]) -> Vec<f64> {
    let inst = &m.instance;
    let mut values = alloc::vec![0.0; m.variables.len()];
    let mut per_vehicle = alloc::vec![0u64; inst.n_vehicles];
    let mut per_sensor = alloc::vec![0u64; inst.n_sensors];
    for &i in chosen {
        values[i] = 1.0;
        let tx = m.decode.transmissions[i];
        per_vehicle[tx.vehicle] += 1;
        per_sensor[tx.sensor] += 1;
    }
    for &(y, v) in &m.decode.participation {
        values[y] = if per_vehicle[v] > 0 { 1.0 } else { 0.0 };
    }
    let counts = inst.gap_sensors.iter().map(|&j| per_sensor[j]);
    if let Some(z) = m.decode.z_max {
        values[z] = counts.clone().max().unwrap_or(0) as f64;
    }
    if let Some(z) = m.decode.z_min {
        values[z] = counts.min().unwrap_or(0) as f64;
    }
    for &(c, j, slot) in &m.decode.cumulative {
        values[c] = chosen
            .iter()
            .map(|&i| m.decode.transmissions[i])
            .filter(|tx| tx.sensor == j && tx.slot <= slot)
            .count() as f64;
    }
    values
}


/// Checks `values` against every bound and row of `m` and decodes it.
///
/// The objective is recomputed from the schedule itself and must agree with
/// the model's objective row evaluated at `values`.
pub fn decode_solution(m: &LinearModel, values: &[f64]) -> Result<SolveResult> {
    if values.len() != m.variables.len() {
        return Err(Error::Inconsistent(format!(
            "expected {} values, got {}",
            m.variables.len(),
            values.len()
        )));
    }
    for (var, &x) in m.variables.iter().zip(values) {
        if !x.is_finite() || x < var.lower - TOL || x > var.upper + TOL {
            return Err(Error::Inconsistent(format!("{} = {x} is out of bounds", var.name)));
        }
        if var.kind == VarKind::Binary && (x - libm::round(x)).abs() > TOL {
            return Err(Error::Inconsistent(format!("{} = {x} is not integral", var.name)));
        }
    }
    if let Some(row) = m.constraints.iter().find(|c| !c.is_satisfied(values, TOL)) {
        return Err(Error::Infeasible(format!("row {} is violated", row.name)));
    }

    let chosen: Vec<_> =
        m.decode.transmissions.iter().enumerate().filter(|(i, _)| values[*i] > 0.5).map(|(_, tx)| *tx).collect();
    let schedule = Schedule::from_transmissions(chosen)?;

    let params = &m.instance.params;
    let flagged: alloc::collections::BTreeSet<usize> =
        m.decode.participation.iter().filter(|(y, _)| values[*y] > 0.5).map(|&(_, v)| v).collect();
    if flagged != participants_of(&schedule, params) {
        return Err(Error::Inconsistent("participation indicators disagree with payments".into()));
    }

    let (score, _) = m.exact_objective(&schedule);
    let objective_value = m.instance.objective_from_score(score);
    let lp_value = m.objective_activity(values);
    if (lp_value - objective_value).abs() > TOL * objective_value.abs().max(1.0) {
        return Err(Error::Inconsistent(format!(
            "objective row gives {lp_value}, schedule gives {objective_value}"
        )));
    }
    Ok(SolveResult::from_schedule(schedule, params, objective_value, SolverStats::default()))
}
