//! Versioned JSON scenario files.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "grid": { "horizon_slots": 10 },
//!   "vehicles": [ { "id": "v0", "samples": [ { "t": 3.0, "lat": 39.9, "lon": 116.4 } ] } ],
//!   "sensors": [ { "id": "s0", "lat": 39.9, "lon": 116.4 } ],
//!   "params": { "unit_cost_usd": 1.0, "c_min_usd": 2.0, "c_max_usd": 5.0 }
//! }
//! ```
//!
//! Every parameter is optional and falls back to [`ParamSet::default`].
//! Amounts are in dollars. `gen_rate` and `fairness_weight` accept a number
//! or a `"p/q"` string; `price_per_mb_usd` may replace `unit_cost_usd`, in
//! which case the unit cost is derived from `unit_size_bytes`.

use std::path::Path;

use relaysched_core::model::{GpsSample, ParamSet, Scenario, Sensor, TimeGrid, VehicleTrajectory};
use relaysched_core::{BufferRule, FairnessWeight, GenRate, Money};
use serde::{Deserialize, Serialize};

use crate::error::{io_at, Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub grid: GridDoc,
    pub vehicles: Vec<VehicleDoc>,
    pub sensors: Vec<SensorDoc>,
    #[serde(default)]
    pub params: ParamsDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDoc {
    pub horizon_slots: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleDoc {
    pub id: String,
    pub samples: Vec<SampleDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleDoc {
    pub t: f64,
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorDoc {
    pub id: String,
    pub lat: f64,
    pub lon: f64,
}

/// A number or a `"p/q"` fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Fraction {
    Number(f64),
    Text(String),
}

impl Fraction {
    fn parts(&self) -> Result<(u32, u32)> {
        let bad = || Error::Invalid(format!("expected a non-negative number or \"p/q\", got {self:?}"));
        match self {
            Fraction::Number(x) if x.fract() == 0.0 && *x >= 0.0 && *x <= u32::MAX as f64 => Ok((*x as u32, 1)),
            Fraction::Number(_) => Err(bad()),
            Fraction::Text(s) => {
                let (p, q) = s.split_once('/').unwrap_or((s.as_str(), "1"));
                Ok((p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?))
            }
        }
    }

    fn of(num: u32, den: u32) -> Fraction {
        if den == 1 {
            Fraction::Number(num as f64)
        } else {
            Fraction::Text(format!("{num}/{den}"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BufferRuleDoc {
    SameSlot,
    NextSlot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit_cost_usd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub price_per_mb_usd: Option<f64>,
    pub unit_size_bytes: u32,
    pub range_m: f64,
    pub gen_rate: Fraction,
    pub c_min_usd: f64,
    pub c_max_usd: f64,
    /// Weights that are not multiples of 1e-6 need the `"p/q"` form.
    pub fairness_weight: Fraction,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delay_bound_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delay_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_vehicle_cap: Option<u32>,
    pub buffer_rule: BufferRuleDoc,
}

impl Default for ParamsDoc {
    fn default() -> Self {
        let mut doc = ParamsDoc::from_params(&ParamSet::default());
        doc.unit_cost_usd = None;
        doc
    }
}

fn money(field: &str, dollars: f64) -> Result<Money> {
    Money::from_dollars(dollars).ok_or_else(|| Error::Invalid(format!("{field} = {dollars} is not a finite amount")))
}

impl ParamsDoc {
    pub fn from_params(p: &ParamSet) -> Self {
        let w = p.fairness_weight;
        let weight = match FairnessWeight::from_f64(w.as_f64()) {
            Ok(snapped) if snapped == w => Fraction::Number(w.as_f64()),
            _ => Fraction::of(w.num(), w.den()),
        };
        ParamsDoc {
            unit_cost_usd: Some(p.unit_cost.to_dollars()),
            price_per_mb_usd: None,
            unit_size_bytes: p.unit_size_bytes,
            range_m: p.range_m,
            gen_rate: Fraction::of(p.gen_rate.num(), p.gen_rate.den()),
            c_min_usd: p.c_min.to_dollars(),
            c_max_usd: p.c_max.to_dollars(),
            fairness_weight: weight,
            delay_bound_s: p.delay_bound_s,
            delay_tolerance: p.delay_tolerance,
            per_vehicle_cap: p.per_vehicle_cap,
            buffer_rule: match p.buffer_rule {
                BufferRule::SameSlot => BufferRuleDoc::SameSlot,
                BufferRule::NextSlot => BufferRuleDoc::NextSlot,
            },
        }
    }

    pub fn to_params(&self) -> Result<ParamSet> {
        let unit_cost = match (self.unit_cost_usd, self.price_per_mb_usd) {
            (Some(_), Some(_)) => {
                return Err(Error::Invalid("give either unit_cost_usd or price_per_mb_usd, not both".into()))
            }
            (Some(c), None) => money("unit_cost_usd", c)?,
            (None, Some(price)) => Money::unit_cost_from_price_per_mb(money("price_per_mb_usd", price)?, self.unit_size_bytes),
            (None, None) => ParamSet::default().unit_cost,
        };
        let (rn, rd) = self.gen_rate.parts()?;
        let fairness_weight = match &self.fairness_weight {
            Fraction::Number(w) => FairnessWeight::from_f64(*w)?,
            text => {
                let (a, b) = text.parts()?;
                FairnessWeight::new(a, b)?
            }
        };
        Ok(ParamSet {
            unit_cost,
            range_m: self.range_m,
            gen_rate: GenRate::new(rn, rd)?,
            c_min: money("c_min_usd", self.c_min_usd)?,
            c_max: money("c_max_usd", self.c_max_usd)?,
            fairness_weight,
            delay_bound_s: self.delay_bound_s,
            delay_tolerance: self.delay_tolerance,
            per_vehicle_cap: self.per_vehicle_cap,
            unit_size_bytes: self.unit_size_bytes,
            buffer_rule: match self.buffer_rule {
                BufferRuleDoc::SameSlot => BufferRule::SameSlot,
                BufferRuleDoc::NextSlot => BufferRule::NextSlot,
            },
        })
    }
}

impl ScenarioFile {
    pub fn from_scenario(s: &Scenario) -> Self {
        ScenarioFile {
            schema_version: SCHEMA_VERSION,
            grid: GridDoc { horizon_slots: s.grid.horizon_slots },
            vehicles: s
                .vehicles
                .iter()
                .map(|v| VehicleDoc {
                    id: v.id.clone(),
                    samples: v.samples.iter().map(|p| SampleDoc { t: p.t, lat: p.pos.lat, lon: p.pos.lon }).collect(),
                })
                .collect(),
            sensors: s
                .sensors
                .iter()
                .map(|x| SensorDoc { id: x.id.clone(), lat: x.position.lat, lon: x.position.lon })
                .collect(),
            params: ParamsDoc::from_params(&s.params),
        }
    }

    pub fn to_scenario(&self) -> Result<Scenario> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion { found: self.schema_version, expected: SCHEMA_VERSION });
        }
        Ok(Scenario {
            grid: TimeGrid::new(self.grid.horizon_slots),
            vehicles: self
                .vehicles
                .iter()
                .map(|v| {
                    VehicleTrajectory::new(v.id.clone(), v.samples.iter().map(|p| GpsSample::new(p.t, p.lat, p.lon)).collect())
                })
                .collect(),
            sensors: self.sensors.iter().map(|x| Sensor::new(x.id.clone(), x.lat, x.lon)).collect(),
            params: self.params.to_params()?,
        })
    }
}

pub fn scenario_from_json(text: &str) -> Result<Scenario> {
    let file: ScenarioFile = serde_json::from_str(text)?;
    file.to_scenario()
}

/// Canonical pretty-printed JSON, newline-terminated.
pub fn scenario_to_json(s: &Scenario) -> String {
    let mut out = serde_json::to_string_pretty(&ScenarioFile::from_scenario(s)).expect("plain data serializes");
    out.push('\n');
    out
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(io_at(path))?;
    scenario_from_json(&text)
}

pub fn save_scenario(path: &Path, s: &Scenario) -> Result<()> {
    std::fs::write(path, scenario_to_json(s)).map_err(io_at(path))
}
