//! Wall-clock timing of the greedy baseline and the exact solver on
//! synthetic city scenarios.

use std::time::Instant;

use relaysched_core::greedy::greedy;
use relaysched_core::ilp::{build_model, solve_exact, ProblemKind, SolveOptions};
use relaysched_core::synth::{city_scenario, CityConfig};
use relaysched_core::extract_contacts;
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    /// Number of trajectories per instance.
    pub sizes: Vec<usize>,
    pub n_sensors: usize,
    pub horizon_s: u32,
    pub seed: u64,
    pub time_limit_s: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig { sizes: vec![10, 50, 100], n_sensors: 10, horizon_s: 1_800, seed: 0, time_limit_s: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n_vehicles: usize,
    pub n_sensors: usize,
    pub horizon_s: u32,
    pub contacts: usize,
    pub contacts_s: f64,
    pub greedy_s: f64,
    pub greedy_units: u64,
    pub exact_s: f64,
    pub exact_units: u64,
    pub exact_proven_optimal: bool,
    pub exact_nodes: u64,
}

pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        let city = CityConfig { n_vehicles: n, n_sensors: cfg.n_sensors, horizon_s: cfg.horizon_s, ..CityConfig::default() };
        let s = city_scenario(&city, cfg.seed);

        let t0 = Instant::now();
        let contacts = extract_contacts(&s);
        let contacts_s = t0.elapsed().as_secs_f64();

        let t0 = Instant::now();
        let g = greedy(&s, &contacts);
        let greedy_s = t0.elapsed().as_secs_f64();

        let t0 = Instant::now();
        let m = build_model(&s, &contacts, ProblemKind::Cspv)?;
        let opts = SolveOptions { time_limit_s: Some(cfg.time_limit_s), node_limit: None };
        let r = solve_exact(&m, &opts)?;
        let exact_s = t0.elapsed().as_secs_f64();

        rows.push(BenchRow {
            n_vehicles: n,
            n_sensors: cfg.n_sensors,
            horizon_s: cfg.horizon_s,
            contacts: contacts.len(),
            contacts_s,
            greedy_s,
            greedy_units: g.throughput(),
            exact_s,
            exact_units: r.throughput(),
            exact_proven_optimal: r.stats.proven_optimal,
            exact_nodes: r.stats.nodes_explored,
        });
    }
    Ok(rows)
}
