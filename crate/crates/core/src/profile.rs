//! Helper CPU state process and its CPU-idling profile.
//!
//! The helper's CPU alternates between busy and idle epochs. While idle it
//! can process the user's data at `f_h / C` bits per second, so the
//! cumulative number of bits it can compute by time `t` is a non-decreasing
//! piecewise-linear curve `U_bit(t)` that rises only inside idle epochs.

use alloc::vec::Vec;

use crate::error::{non_negative, positive, Error, Result};
use crate::tol;

/// State of the helper CPU during an epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CpuState {
    Busy,
    Idle,
}

impl CpuState {
    #[inline]
    pub fn is_idle(self) -> bool {
        matches!(self, CpuState::Idle)
    }

    /// `1.0` when idle, `0.0` when busy.
    #[inline]
    pub fn indicator(self) -> f64 {
        if self.is_idle() {
            1.0
        } else {
            0.0
        }
    }
}

/// A maximal interval during which the helper CPU stays in one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Epoch {
    /// Length in seconds.
    pub duration: f64,
    pub state: CpuState,
}

impl Epoch {
    pub fn idle(duration: f64) -> Self {
        Epoch {
            duration,
            state: CpuState::Idle,
        }
    }

    pub fn busy(duration: f64) -> Self {
        Epoch {
            duration,
            state: CpuState::Busy,
        }
    }
}

/// A normalized epoch sequence over `[0, T]` with the computable-bits curve
/// precomputed at every epoch boundary.
///
/// Adjacent epochs with the same state are merged on construction, so the
/// stored epochs strictly alternate.
#[derive(Debug, Clone, PartialEq)]
pub struct CpuIdlingProfile {
    epochs: Vec<Epoch>,
    boundaries: Vec<f64>,
    u_bit: Vec<f64>,
    helper_hz: f64,
    cycles_per_bit: f64,
}

impl CpuIdlingProfile {
    /// Builds a profile from raw epochs.
    ///
    /// Durations must sum to `horizon` within 1e-12 s; the last epoch is
    /// nudged so the sum is exact afterwards. Same-state neighbours are merged
    /// and any merged epoch not longer than 1e-12 s is rejected.
    pub fn new(
        epochs: &[Epoch],
        helper_hz: f64,
        cycles_per_bit: f64,
        horizon: f64,
    ) -> Result<Self> {
        positive("helper_hz", helper_hz)?;
        positive("cycles_per_bit", cycles_per_bit)?;
        positive("horizon", horizon)?;
        if epochs.is_empty() {
            return Err(Error::DurationMismatch {
                expected: horizon,
                actual: 0.0,
            });
        }
        let mut merged: Vec<Epoch> = Vec::with_capacity(epochs.len());
        for e in epochs {
            positive("epoch duration", e.duration)?;
            match merged.last_mut() {
                Some(last) if last.state == e.state => last.duration += e.duration,
                _ => merged.push(*e),
            }
        }
        let total: f64 = merged.iter().map(|e| e.duration).sum();
        if (total - horizon).abs() > tol::TIME {
            return Err(Error::DurationMismatch {
                expected: horizon,
                actual: total,
            });
        }
        Self::assemble(merged, helper_hz, cycles_per_bit, horizon)
    }

    fn assemble(
        mut epochs: Vec<Epoch>,
        helper_hz: f64,
        cycles_per_bit: f64,
        horizon: f64,
    ) -> Result<Self> {
        let slope = helper_hz / cycles_per_bit;
        let n = epochs.len();
        let mut boundaries = Vec::with_capacity(n + 1);
        boundaries.push(0.0);
        let mut t = 0.0;
        for (i, e) in epochs.iter().enumerate() {
            t = if i + 1 == n { horizon } else { t + e.duration };
            boundaries.push(t);
        }
        let mut u_bit = Vec::with_capacity(n + 1);
        u_bit.push(0.0);
        let mut u = 0.0;
        for (i, e) in epochs.iter_mut().enumerate() {
            e.duration = boundaries[i + 1] - boundaries[i];
            if e.duration <= tol::TIME {
                return Err(Error::DegenerateEpoch { index: i });
            }
            u += e.state.indicator() * e.duration * slope;
            u_bit.push(u);
        }
        Ok(CpuIdlingProfile {
            epochs,
            boundaries,
            u_bit,
            helper_hz,
            cycles_per_bit,
        })
    }

    pub fn epochs(&self) -> &[Epoch] {
        &self.epochs
    }

    /// Epoch boundaries `s_0 = 0, s_1, ..., s_n = T`.
    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// Computable bits at each boundary, aligned with [`boundaries`](Self::boundaries)
    /// (so the first entry is always zero).
    pub fn u_bit(&self) -> &[f64] {
        &self.u_bit
    }

    pub fn horizon(&self) -> f64 {
        *self
            .boundaries
            .last()
            .expect("profile has at least one epoch")
    }

    pub fn helper_hz(&self) -> f64 {
        self.helper_hz
    }

    pub fn cycles_per_bit(&self) -> f64 {
        self.cycles_per_bit
    }

    /// Bits per second the helper computes while idle.
    pub fn idle_rate(&self) -> f64 {
        self.helper_hz / self.cycles_per_bit
    }

    /// Total computable bits by the end of the last idle epoch.
    pub fn capacity(&self) -> f64 {
        *self.u_bit.last().expect("profile has at least one epoch")
    }

    /// True when the profile has no idle time at all.
    pub fn is_zero_capacity(&self) -> bool {
        self.end_index().is_none()
    }

    /// Number of epochs up to and including the last idle one, if any.
    pub fn end_index(&self) -> Option<usize> {
        self.epochs
            .iter()
            .rposition(|e| e.state.is_idle())
            .map(|i| i + 1)
    }

    /// End of the last idle epoch: the latest instant the helper can compute.
    pub fn t_end(&self) -> Option<f64> {
        self.end_index().map(|k| self.boundaries[k])
    }

    /// Total idle time over the horizon.
    pub fn idle_time(&self) -> f64 {
        self.epochs
            .iter()
            .filter(|e| e.state.is_idle())
            .map(|e| e.duration)
            .sum()
    }

    /// Evaluates `U_bit(t)`.
    pub fn u_bit_at(&self, t: f64) -> Result<f64> {
        let horizon = self.horizon();
        if !(t >= -tol::TIME && t <= horizon + tol::TIME) {
            return Err(Error::TimeOutOfRange { t, horizon });
        }
        let t = t.clamp(0.0, horizon);
        // index of the last boundary <= t
        let k = self
            .boundaries
            .partition_point(|&s| s <= t)
            .saturating_sub(1);
        if k >= self.epochs.len() {
            return Ok(self.capacity());
        }
        let e = &self.epochs[k];
        let into = t - self.boundaries[k];
        Ok(self.u_bit[k] + e.state.indicator() * into * self.idle_rate())
    }

    /// The CPU state in force at time `t` (the state of the epoch whose
    /// half-open interval `[s_k, s_{k+1})` contains `t`; the last epoch at `T`).
    pub fn state_at(&self, t: f64) -> CpuState {
        let k = self
            .boundaries
            .partition_point(|&s| s <= t)
            .saturating_sub(1);
        self.epochs[k.min(self.epochs.len() - 1)].state
    }

    /// Effective profile under proportional CPU utilization: every idle
    /// second the helper devotes `f_h * bits / U_bit,K` cycles to the user,
    /// so the whole curve is scaled to end exactly at `bits`.
    pub fn proportional(&self, bits: f64) -> Result<CpuIdlingProfile> {
        non_negative("offload bits", bits)?;
        let capacity = self.capacity();
        if !tol::bits_le(bits, capacity) {
            return Err(Error::ExceedsCapacity {
                requested: bits,
                capacity,
            });
        }
        if capacity <= 0.0 {
            return Ok(self.clone());
        }
        let bits = bits.min(capacity);
        let scale = bits / capacity;
        let end = self.end_index().unwrap_or(0);
        let u_bit = self
            .u_bit
            .iter()
            .enumerate()
            .map(|(k, &u)| if k >= end { bits } else { u * scale })
            .collect();
        Ok(CpuIdlingProfile {
            epochs: self.epochs.clone(),
            boundaries: self.boundaries.clone(),
            u_bit,
            helper_hz: self.helper_hz * scale,
            cycles_per_bit: self.cycles_per_bit,
        })
    }

    /// Lazy-first usage of the helper: the earliest `U_bit,K - bits` bits of
    /// idle capacity are left unused, so the user's data is computed only in
    /// the latest idle time. Skipped idle time is reported as busy and an idle
    /// epoch is split where the helper starts computing.
    ///
    /// The resulting curve is `max(U_bit(t) - (U_bit,K - bits), 0)`.
    pub fn lazy(&self, bits: f64) -> Result<CpuIdlingProfile> {
        non_negative("offload bits", bits)?;
        let capacity = self.capacity();
        if !tol::bits_le(bits, capacity) {
            return Err(Error::ExceedsCapacity {
                requested: bits,
                capacity,
            });
        }
        let bits = bits.min(capacity);
        let rate = self.idle_rate();
        let mut skip_time = (capacity - bits) / rate;
        let mut epochs: Vec<Epoch> = Vec::with_capacity(self.epochs.len() + 1);
        let push = |e: Epoch, epochs: &mut Vec<Epoch>| match epochs.last_mut() {
            Some(last) if last.state == e.state => last.duration += e.duration,
            _ => epochs.push(e),
        };
        for e in &self.epochs {
            if e.state.is_idle() && skip_time > 0.0 {
                if skip_time >= e.duration - tol::TIME {
                    skip_time -= e.duration;
                    push(Epoch::busy(e.duration), &mut epochs);
                } else if skip_time <= tol::TIME {
                    skip_time = 0.0;
                    push(*e, &mut epochs);
                } else {
                    push(Epoch::busy(skip_time), &mut epochs);
                    push(Epoch::idle(e.duration - skip_time), &mut epochs);
                    skip_time = 0.0;
                }
            } else {
                push(*e, &mut epochs);
            }
        }
        let mut lazy = Self::assemble(epochs, self.helper_hz, self.cycles_per_bit, self.horizon())?;
        if let Some(end) = lazy.end_index() {
            for u in &mut lazy.u_bit[end..] {
                *u = bits;
            }
        }
        Ok(lazy)
    }
}
