use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("epoch durations sum to {actual} s but the horizon is {expected} s")]
    DurationMismatch { expected: f64, actual: f64 },
    #[error("epoch {index} is shorter than the time tolerance")]
    DegenerateEpoch { index: usize },
    #[error("time {t} s lies outside [0, {horizon}] s")]
    TimeOutOfRange { t: f64, horizon: f64 },
    #[error("arrival times must be strictly increasing inside the horizon (event {index})")]
    UnorderedArrivals { index: usize },
    #[error("{size} bits arrive at the deadline and can never be computed")]
    ArrivalAtDeadline { size: f64 },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("offloading {requested} bits exceeds the helper capacity of {capacity} bits")]
    ExceedsCapacity { requested: f64, capacity: f64 },
    #[error("full-utilization tunnel needs exactly {capacity} bits, got {requested}")]
    NotFullUtilization { requested: f64, capacity: f64 },
    #[error("feasibility tunnel is empty: its floor rises above its ceiling")]
    InfeasibleTunnel,
    #[error("partition infeasible: at least {required} bits must be offloaded but the helper takes {available}")]
    InfeasiblePartition { required: f64, available: f64 },
    #[error("no feasible partition ratio: theta_min = {min} exceeds theta_max = {max}")]
    InfeasibleRatio { min: f64, max: f64 },
    #[error("unsupported policy: {policy}")]
    UnsupportedPolicy { policy: &'static str },
    #[error("solver did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value >= 0.0 && !value.is_nan() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}
