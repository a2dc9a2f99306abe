//! Exhaustive enumeration over transmission variables.
//!
//! Deliberately shares nothing with the branch-and-bound search beyond the
//! model itself: every candidate is checked against the model's rows after
//! the auxiliary variables are set from first principles.

use alloc::vec::Vec;

use super::decode::{assignment_for, decode_solution};
use super::{LinearModel, Sense};
use crate::error::{Error, Result};
use crate::model::{SolveResult, SolverStats};

/// Largest number of transmission variables enumerated.
pub const BRUTE_FORCE_CAP: usize = 25;

/// Optimal solution by enumeration. Among equal objectives the
/// lexicographically smallest set of transmission variables wins.
pub fn solve_bruteforce(m: &LinearModel) -> Result<SolveResult> {
    let n = m.n_transmission_vars();
    if n > BRUTE_FORCE_CAP {
        return Err(Error::BruteForceCap { vars: n, cap: BRUTE_FORCE_CAP });
    }

    // rows over transmission variables only, with non-negative coefficients:
    // once violated, adding transmissions never repairs them
    let monotone: Vec<usize> = m
        .constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| c.sense == Sense::Le && c.terms.iter().all(|&(v, k)| v < n && k >= 0.0))
        .map(|(i, _)| i)
        .collect();
    let mut rows_of_var: Vec<Vec<(usize, f64)>> = alloc::vec![Vec::new(); n];
    for (slot, &r) in monotone.iter().enumerate() {
        for &(v, k) in &m.constraints[r].terms {
            rows_of_var[v].push((slot, k));
        }
    }
    let activity = alloc::vec![0.0f64; monotone.len()];

    let mut walk = Walk { m, n, monotone, rows_of_var, activity, chosen: Vec::new(), best: None, nodes: 0 };
    walk.visit(0);
    let Walk { best, nodes, .. } = walk;

    let Some((score, set)) = best else {
        return Err(Error::Infeasible("no assignment satisfies every constraint".into()));
    };
    let mut result = decode_solution(m, &assignment_for(m, &set))?;
    if result.objective_value != m.instance.objective_from_score(score) {
        return Err(Error::Inconsistent("decoded objective differs from enumerated objective".into()));
    }
    result.stats = SolverStats {
        nodes_explored: nodes,
        wall_time_s: 0.0,
        proven_optimal: true,
        dual_bound: result.objective_value,
    };
    Ok(result)
}

struct Walk<'a> {
    m: &'a LinearModel,
    n: usize,
    monotone: Vec<usize>,
    rows_of_var: Vec<Vec<(usize, f64)>>,
    activity: Vec<f64>,
    chosen: Vec<usize>,
    best: Option<(i128, Vec<usize>)>,
    nodes: u64,
}

impl Walk<'_> {
    /// Depth is bounded by `BRUTE_FORCE_CAP`.
    fn visit(&mut self, i: usize) {
        self.nodes += 1;
        if i == self.n {
            if let Some(score) = evaluate(self.m, &self.chosen) {
                let better = match &self.best {
                    None => true,
                    Some((b, set)) => score > *b || (score == *b && self.chosen < *set),
                };
                if better {
                    self.best = Some((score, self.chosen.clone()));
                }
            }
            return;
        }
        let var = &self.m.variables[i];
        // take x_i first so that `chosen` stays sorted
        let fits = self.rows_of_var[i]
            .iter()
            .all(|&(r, k)| self.activity[r] + k <= self.m.constraints[self.monotone[r]].rhs + 1e-9);
        if fits && var.upper >= 1.0 {
            for &(r, k) in &self.rows_of_var[i] {
                self.activity[r] += k;
            }
            self.chosen.push(i);
            self.visit(i + 1);
            self.chosen.pop();
            for &(r, k) in &self.rows_of_var[i] {
                self.activity[r] -= k;
            }
        }
        if var.lower < 1.0 {
            self.visit(i + 1);
        }
    }
}

/// Score of the candidate if every row holds, with auxiliaries at their
/// tight values.
fn evaluate(m: &LinearModel, chosen: &[usize]) -> Option<i128> {
    let values = assignment_for(m, chosen);
    for (v, var) in m.variables.iter().enumerate() {
        if values[v] < var.lower - 1e-9 || values[v] > var.upper + 1e-9 {
            return None;
        }
    }
    if !m.constraints.iter().all(|c| c.is_satisfied(&values, 1e-9)) {
        return None;
    }
    let inst = &m.instance;
    let mut per_sensor = alloc::vec![0u64; inst.n_sensors];
    for &i in chosen {
        per_sensor[m.decode.transmissions[i].sensor] += 1;
    }
    Some(inst.score(chosen.len() as u64, inst.gap_of_counts(&per_sensor)))
}
