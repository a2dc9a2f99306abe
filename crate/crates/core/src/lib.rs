//! Budget-constrained communication scheduling between roadside sensors and
//! passing vehicles.
//!
//! Vehicles that pass within radio range of a sensor can carry the sensor's
//! data units to the network operator for a per-unit payment. This crate
//! computes which vehicle should receive which unit at which one-second slot:
//!
//! * [`geo`] turns GPS trajectories into a sparse set of contact events,
//! * [`ilp`] builds the 0-1 programs (throughput, fairness-weighted and
//!   delay-bounded variants) and solves them exactly by branch-and-bound, with
//!   a brute-force oracle for small models,
//! * [`greedy`] provides the slot-by-slot greedy baselines,
//! * [`simulator`] and [`metrics`] evaluate schedules under no-shows and
//!   against a direct-subscription baseline.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the T-Drive reader
//! and the command-line driver live in the `relaysched` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]
// negated float comparisons reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod feasibility;
pub mod geo;
pub mod greedy;
pub mod ilp;
pub mod metrics;
pub mod model;
pub mod simulator;
pub mod synth;
pub mod units;

pub use error::{Error, Result};
pub use geo::{extract_contacts, haversine_distance, ContactEvent, ContactSet, LatLon};
pub use ilp::{build_model, solve_bruteforce, solve_exact, LinearModel, ModelOptions, ProblemKind, SolveOptions};
pub use model::{
    compensation_of, participants_of, validate_scenario, GpsSample, ParamSet, Scenario, Schedule, Sensor,
    SolveResult, SolverStats, TimeGrid, Transmission, VehicleTrajectory, Violation, ViolationCode,
};
pub use units::{BufferRule, FairnessWeight, GenRate, Money};
