//! Transmission and local-computing energy models.

use crate::error::{non_negative, positive, Error, Result};

/// Point-to-point channel between user and helper, in linear SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Channel power gain `h^2`.
    pub h_sq: f64,
    /// Bandwidth in Hz.
    pub bandwidth: f64,
    /// Noise power in W.
    pub noise: f64,
}

impl ChannelParams {
    pub fn new(h_sq: f64, bandwidth: f64, noise: f64) -> Result<Self> {
        positive("h_sq", h_sq)?;
        positive("bandwidth", bandwidth)?;
        positive("noise", noise)?;
        Ok(ChannelParams {
            h_sq,
            bandwidth,
            noise,
        })
    }

    /// `N0 (2^(x/W) - 1)`, the power needed for rate `x` at unit gain.
    #[inline]
    pub fn power(&self, rate: f64) -> f64 {
        self.noise * libm::expm1(rate * core::f64::consts::LN_2 / self.bandwidth)
    }

    /// Derivative of [`power`](Self::power) with respect to the rate.
    #[inline]
    pub fn power_derivative(&self, rate: f64) -> f64 {
        let k = core::f64::consts::LN_2 / self.bandwidth;
        self.noise * k * libm::exp(rate * k)
    }

    /// Second derivative of [`power`](Self::power).
    #[inline]
    pub fn power_curvature(&self, rate: f64) -> f64 {
        let k = core::f64::consts::LN_2 / self.bandwidth;
        self.noise * k * k * libm::exp(rate * k)
    }

    /// Rate achievable with power `p` at unit gain: `W log2(1 + p/N0)`.
    #[inline]
    pub fn rate_for_power(&self, p: f64) -> f64 {
        self.bandwidth * libm::log1p(p / self.noise) / core::f64::consts::LN_2
    }

    /// Energy to send `bits` over `duration` seconds at constant rate.
    #[inline]
    pub fn energy(&self, bits: f64, duration: f64) -> f64 {
        duration / self.h_sq * self.power(bits / duration)
    }
}

/// The user's own processor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalComputeParams {
    /// CPU frequency in cycles/s.
    pub freq: f64,
    /// Cycles needed per bit.
    pub cycles_per_bit: f64,
    /// Switched capacitance coefficient.
    pub gamma: f64,
}

impl LocalComputeParams {
    pub fn new(freq: f64, cycles_per_bit: f64, gamma: f64) -> Result<Self> {
        positive("freq", freq)?;
        positive("cycles_per_bit", cycles_per_bit)?;
        positive("gamma", gamma)?;
        Ok(LocalComputeParams {
            freq,
            cycles_per_bit,
            gamma,
        })
    }

    /// Energy per CPU cycle, `gamma f^2`.
    #[inline]
    pub fn p_cyc(&self) -> f64 {
        self.gamma * self.freq * self.freq
    }

    /// Energy per locally computed bit.
    #[inline]
    pub fn energy_per_bit(&self) -> f64 {
        self.cycles_per_bit * self.p_cyc()
    }

    /// Bits per second.
    #[inline]
    pub fn rate(&self) -> f64 {
        self.freq / self.cycles_per_bit
    }
}

pub fn rate_to_power(rate: f64, ch: &ChannelParams) -> Result<f64> {
    non_negative("rate", rate)?;
    Ok(ch.power(rate))
}

pub fn epoch_energy(bits: f64, duration: f64, ch: &ChannelParams) -> Result<f64> {
    non_negative("bits", bits)?;
    positive("duration", duration)?;
    Ok(ch.energy(bits, duration))
}

/// Total transmit energy of per-epoch bit amounts over matching durations.
pub fn schedule_energy(bits: &[f64], durations: &[f64], ch: &ChannelParams) -> Result<f64> {
    if bits.len() != durations.len() {
        return Err(Error::LengthMismatch {
            expected: durations.len(),
            actual: bits.len(),
        });
    }
    bits.iter()
        .zip(durations)
        .map(|(&b, &d)| epoch_energy(b, d, ch))
        .sum()
}

pub fn local_energy(bits: f64, lc: &LocalComputeParams) -> f64 {
    bits * lc.energy_per_bit()
}

/// Bits that cannot be computed locally before `horizon`: `max(L - fT/C, 0)`.
pub fn min_offload(bits: f64, horizon: f64, lc: &LocalComputeParams) -> f64 {
    (bits - lc.rate() * horizon).max(0.0)
}
