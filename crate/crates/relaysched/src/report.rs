//! CSV and JSON outputs. Data files carry no timestamps or timings, so
//! identical inputs give byte-identical files; only bench output is timed.

use std::path::Path;

use relaysched_core::geo::{haversine_distance, position_at};
use relaysched_core::metrics::MetricsReport;
use relaysched_core::model::{Scenario, Schedule, SolveResult};
use serde::{Deserialize, Serialize};

use crate::error::{io_at, Result};
use crate::scenario_file::{ParamsDoc, SCHEMA_VERSION};

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields"))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(io_at(path))
}

/// Pretty JSON, newline-terminated.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn round_to(x: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    (x * f).round() / f
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub vehicle_id: String,
    pub sensor_id: String,
    pub slot: u32,
    /// Millimetre precision.
    pub distance_m: f64,
}

/// One row per transmission, in canonical order.
pub fn schedule_rows(s: &Scenario, sched: &Schedule) -> Vec<ScheduleRow> {
    sched
        .iter()
        .map(|tx| {
            let d = position_at(&s.vehicles[tx.vehicle], tx.slot)
                .map(|p| haversine_distance(p, s.sensors[tx.sensor].position))
                .unwrap_or(f64::NAN);
            ScheduleRow {
                vehicle_id: s.vehicles[tx.vehicle].id.clone(),
                sensor_id: s.sensors[tx.sensor].id.clone(),
                slot: tx.slot,
                distance_m: round_to(d, 3),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub label: String,
    pub throughput_units: u64,
    pub fairness_gap_units: u64,
    pub total_spend_usd: f64,
    pub participant_count: usize,
    pub mean_delay_s: Option<f64>,
    pub max_delay_s: Option<f64>,
}

impl MetricsRow {
    pub fn new(label: &str, m: &MetricsReport) -> Self {
        let n = m.per_unit_delays_s.len();
        MetricsRow {
            label: label.to_string(),
            throughput_units: m.throughput_units,
            fairness_gap_units: m.fairness_gap_units,
            total_spend_usd: m.total_spend.to_dollars(),
            participant_count: m.participant_count,
            mean_delay_s: (n > 0).then(|| m.per_unit_delays_s.iter().sum::<f64>() / n as f64),
            max_delay_s: m.max_delay_s(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfRow {
    pub delay_s: f64,
    pub cumulative_fraction: f64,
}

pub fn cdf_rows(cdf: &[(f64, f64)]) -> Vec<CdfRow> {
    cdf.iter().map(|&(delay_s, cumulative_fraction)| CdfRow { delay_s, cumulative_fraction }).collect()
}

/// Summary of one solve, written as `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: String,
    pub objective_value: f64,
    pub throughput: u64,
    pub fairness_gap: u64,
    pub total_spend_usd: f64,
    pub participants: Vec<String>,
    pub compensation_usd: Vec<(String, f64)>,
    pub proven_optimal: bool,
    pub dual_bound: f64,
    pub nodes_explored: u64,
}

impl RunReport {
    pub fn new(algorithm: &str, s: &Scenario, r: &SolveResult, m: &MetricsReport) -> Self {
        RunReport {
            algorithm: algorithm.to_string(),
            objective_value: r.objective_value,
            throughput: m.throughput_units,
            fairness_gap: m.fairness_gap_units,
            total_spend_usd: r.total_spend.to_dollars(),
            participants: r.participants.iter().map(|&v| s.vehicles[v].id.clone()).collect(),
            compensation_usd: r.compensation.iter().map(|(&v, c)| (s.vehicles[v].id.clone(), c.to_dollars())).collect(),
            proven_optimal: r.stats.proven_optimal,
            dual_bound: r.stats.dual_bound,
            nodes_explored: r.stats.nodes_explored,
        }
    }
}

/// Everything needed to rerun a command, written as `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub tool_version: String,
    pub schema_version: u32,
    pub command: String,
    /// Command-line arguments after the program name.
    pub arguments: Vec<String>,
    pub seeds: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsDoc>,
}

impl Manifest {
    pub fn new(command: &str, arguments: Vec<String>, seeds: Vec<u64>, params: Option<ParamsDoc>) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            arguments,
            seeds,
            params,
        }
    }
}
