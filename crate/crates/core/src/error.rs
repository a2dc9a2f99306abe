use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown vehicle index {0}")]
    UnknownVehicle(usize),
    #[error("unknown sensor index {0}")]
    UnknownSensor(usize),
    #[error("slot {slot} is outside the horizon of {horizon} slots")]
    SlotOutOfRange { slot: u32, horizon: u32 },
    #[error("sensor {sensor} transmits more than once in slot {slot}")]
    DuplicateSensorSlot { sensor: usize, slot: u32 },
    #[error("sensor {sensor} transmits unit {unit} at slot {slot} before it is generated")]
    CausalityViolation { sensor: usize, slot: u32, unit: u64 },
    #[error("trajectory {index} has {found} samples, expected {expected}")]
    TrajectoryLengthMismatch { index: usize, expected: usize, found: usize },
    #[error("mean timestamps are not strictly increasing at sample {0}")]
    NonMonotoneMean(usize),
    #[error("input sequence is empty")]
    EmptyInput,
    #[error("model has {vars} transmission variables, brute force is capped at {cap}")]
    BruteForceCap { vars: usize, cap: usize },
    #[error("model is infeasible: {0}")]
    Infeasible(String),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
