//! Random generation of helper CPU processes and bursty arrivals.

use alloc::vec::Vec;

use rand::Rng;

use crate::arrival::{Arrival, ArrivalProcess};
use crate::error::{non_negative, positive, Error, Result};
use crate::profile::{CpuState, Epoch};
use crate::tol;

/// CPU state at `t = 0` for sampled processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialState {
    /// Busy or idle with probability 1/2 each.
    #[default]
    Random,
    Idle,
    Busy,
}

fn exponential<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> f64 {
    let u: f64 = rng.gen();
    -mean * libm::log1p(-u)
}

/// Alternating busy/idle epochs with exponential lengths, the last one cut
/// at `horizon`.
///
/// Epochs at or below the 1e-12 s time tolerance are folded into their
/// predecessor so the result always builds a valid profile.
pub fn sample_cpu_process<R: Rng + ?Sized>(
    rng: &mut R,
    horizon: f64,
    mean_idle: f64,
    mean_busy: f64,
    initial: InitialState,
) -> Result<Vec<Epoch>> {
    positive("horizon", horizon)?;
    positive("mean_idle", mean_idle)?;
    positive("mean_busy", mean_busy)?;
    let mut state = match initial {
        InitialState::Idle => CpuState::Idle,
        InitialState::Busy => CpuState::Busy,
        InitialState::Random => {
            if rng.gen::<bool>() {
                CpuState::Idle
            } else {
                CpuState::Busy
            }
        }
    };
    let mut epochs: Vec<Epoch> = Vec::new();
    let mut t = 0.0;
    while t < horizon {
        let mean = if state.is_idle() {
            mean_idle
        } else {
            mean_busy
        };
        let mut d = exponential(rng, mean);
        if t + d >= horizon - tol::TIME {
            d = horizon - t;
        }
        if d > tol::TIME {
            epochs.push(Epoch { duration: d, state });
            t += d;
        } else if let Some(last) = epochs.last_mut() {
            last.duration += d;
            t += d;
        }
        state = match state {
            CpuState::Idle => CpuState::Busy,
            CpuState::Busy => CpuState::Idle,
        };
    }
    Ok(epochs)
}

/// Poisson arrivals on `(0, T)` with sizes uniform on `[size_low, size_high]`.
///
/// Arrivals closer than 1e-12 s to the previous event or to the deadline are
/// folded into the previous event (or dropped when there is none).
pub fn sample_arrivals<R: Rng + ?Sized>(
    rng: &mut R,
    horizon: f64,
    mean_interarrival: f64,
    size_low: f64,
    size_high: f64,
) -> Result<ArrivalProcess> {
    positive("horizon", horizon)?;
    positive("mean_interarrival", mean_interarrival)?;
    non_negative("size_low", size_low)?;
    if !(size_high >= size_low) || !size_high.is_finite() {
        return Err(Error::InvalidParameter {
            name: "size_high",
            value: size_high,
        });
    }
    let mut events: Vec<Arrival> = Vec::new();
    let mut t = 0.0;
    loop {
        t += exponential(rng, mean_interarrival);
        let u: f64 = rng.gen();
        let size = size_low + (size_high - size_low) * u;
        if t >= horizon - tol::TIME {
            break;
        }
        match events.last_mut() {
            Some(last) if t <= last.time + tol::TIME => last.size += size,
            _ => events.push(Arrival { time: t, size }),
        }
    }
    ArrivalProcess::new(&events, horizon)
}
