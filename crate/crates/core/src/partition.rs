//! Splitting input data between local computing and offloading.

use alloc::vec::Vec;

use crate::arrival::ArrivalProcess;
use crate::energy::{local_energy, min_offload, ChannelParams, LocalComputeParams};
use crate::error::{non_negative, Error, Result};
use crate::policy::{plan_offload, OffloadPolicy};
use crate::profile::CpuIdlingProfile;
use crate::schedule::{pull_string, OffloadSchedule};
use crate::tol;
use crate::tunnel::{bursty_effective_tunnel, theta_max, theta_min, FeasibilityTunnel};

const INV_PHI: f64 = 0.618_033_988_749_894_8;
const GRID: usize = 33;

/// One-shot arrival of `bits` at `t = 0` with deadline `horizon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneShotProblem {
    pub bits: f64,
    pub horizon: f64,
    /// Helper buffer size in bits.
    pub buffer: f64,
    pub channel: ChannelParams,
    pub local: LocalComputeParams,
}

/// Bursty arrivals, all offloaded in the same proportion `theta`. The
/// helper buffer is assumed large enough for all offloaded data.
#[derive(Debug, Clone, PartialEq)]
pub struct BurstyProblem {
    pub arrivals: ArrivalProcess,
    pub horizon: f64,
    pub channel: ChannelParams,
    pub local: LocalComputeParams,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionOptions {
    pub policy: OffloadPolicy,
    /// Return the minimum offload without searching when a closed-form
    /// condition shows it is optimal.
    pub shortcut: bool,
}

impl Default for PartitionOptions {
    fn default() -> Self {
        PartitionOptions {
            policy: OffloadPolicy::Optimal,
            shortcut: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionResult {
    pub offload_bits: f64,
    pub ratio: f64,
    pub total_energy: f64,
    pub local_energy: f64,
    pub transmit_energy: f64,
    /// Answer came from the minimum-offload shortcut.
    pub shortcut: bool,
    /// The objective failed a convexity check and was searched on a grid.
    pub convex_fallback: bool,
}

/// Golden-section search for the minimum of `f` on `[a, b]`, also comparing
/// against both endpoints.
fn golden<F: FnMut(f64) -> Result<f64>>(
    a: f64,
    b: f64,
    tolerance: f64,
    f: &mut F,
) -> Result<(f64, f64)> {
    let (fa, fb) = (f(a)?, f(b)?);
    let mut best = if fb < fa { (b, fb) } else { (a, fa) };
    if b - a <= tolerance {
        return Ok(best);
    }
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while hi - lo > tolerance {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    for (x, fx) in [(x1, f1), (x2, f2)] {
        if fx < best.1 {
            best = (x, fx);
        }
    }
    Ok(best)
}

/// Coarse grid followed by golden-section refinement around the best point.
fn bracketed<F: FnMut(f64) -> Result<f64>>(
    a: f64,
    b: f64,
    tolerance: f64,
    n: usize,
    f: &mut F,
) -> Result<(f64, f64)> {
    let xs: Vec<f64> = (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect();
    let mut best = (a, f64::INFINITY);
    let mut at = 0;
    for (i, &x) in xs.iter().enumerate() {
        let fx = f(x)?;
        if fx < best.1 {
            best = (x, fx);
            at = i;
        }
    }
    let lo = xs[at.saturating_sub(1)];
    let hi = xs[(at + 1).min(n - 1)];
    let refined = golden(lo, hi, tolerance, f)?;
    Ok(if refined.1 < best.1 { refined } else { best })
}

fn transmit_energy(
    profile: &CpuIdlingProfile,
    bits: f64,
    q: f64,
    ch: &ChannelParams,
    policy: OffloadPolicy,
) -> Result<f64> {
    Ok(plan_offload(profile, bits, q, ch, policy)?.energy)
}

/// Returns the minimum offload `max(L - fT/C, 0)` when offloading more can
/// only cost more.
///
/// Any schedule ending by `t_end` spends at least `(t_end/h^2) f(l/t_end)`, so
/// with `x = l_min / t_end` a convex transmit energy has slope at least
/// `f(x) / (x h^2)` beyond `l_min` (`f'(0)/h^2` when `l_min = 0`). The
/// shortcut fires when that already exceeds the local cost per bit.
pub fn min_offload_shortcut(
    bits: f64,
    horizon: f64,
    t_end: Option<f64>,
    ch: &ChannelParams,
    lc: &LocalComputeParams,
) -> Option<f64> {
    let t_end = t_end?;
    let required = min_offload(bits, horizon, lc);
    let x = required / t_end;
    let slope = if x > 0.0 {
        ch.power(x) / (x * ch.h_sq)
    } else {
        ch.power_derivative(0.0) / ch.h_sq
    };
    (slope >= lc.energy_per_bit()).then_some(required)
}

/// Minimizes `(L - l) C P_cyc + E_off(l)` over `max(L - fT/C, 0) <= l <= min(U_bit,K, L)`.
pub fn optimize_partition(
    problem: &OneShotProblem,
    profile: &CpuIdlingProfile,
    options: PartitionOptions,
) -> Result<PartitionResult> {
    non_negative("bits", problem.bits)?;
    non_negative("buffer", problem.buffer)?;
    let (big_l, q, ch, lc) = (
        problem.bits,
        problem.buffer,
        &problem.channel,
        &problem.local,
    );
    let required = min_offload(big_l, problem.horizon, lc);
    let capacity = profile.capacity();
    let upper = capacity.min(big_l);
    if !tol::bits_le(required, upper) {
        return Err(Error::InfeasiblePartition {
            required,
            available: capacity,
        });
    }
    let lower = required.min(upper);
    let convex = options.policy == OffloadPolicy::Benchmark || q >= upper;
    let finish = |l: f64, shortcut: bool, convex_fallback: bool| -> Result<PartitionResult> {
        let transmit = transmit_energy(profile, l, q, ch, options.policy)?;
        let local = local_energy(big_l - l, lc);
        Ok(PartitionResult {
            offload_bits: l,
            ratio: if big_l > 0.0 { l / big_l } else { 0.0 },
            total_energy: local + transmit,
            local_energy: local,
            transmit_energy: transmit,
            shortcut,
            convex_fallback,
        })
    };
    if options.shortcut && convex {
        if let Some(l) = min_offload_shortcut(big_l, problem.horizon, profile.t_end(), ch, lc) {
            return finish(l.min(upper), true, false);
        }
    }
    let mut objective = |l: f64| -> Result<f64> {
        Ok(local_energy(big_l - l, lc) + transmit_energy(profile, l, q, ch, options.policy)?)
    };
    let (l, _) = if convex {
        golden(lower, upper, 1.0, &mut objective)?
    } else {
        bracketed(lower, upper, 1.0, GRID, &mut objective)?
    };
    finish(l, false, false)
}

/// Central difference of the transmit energy with step `max(1e-6 l, 1)` bits.
pub fn subgradient_e_off(
    profile: &CpuIdlingProfile,
    bits: f64,
    q: f64,
    ch: &ChannelParams,
    policy: OffloadPolicy,
) -> Result<f64> {
    let h = (1e-6 * bits).max(1.0);
    if bits - h < 0.0 {
        return Err(Error::InvalidParameter {
            name: "offload bits",
            value: bits,
        });
    }
    if bits + h > profile.capacity() {
        return Err(Error::ExceedsCapacity {
            requested: bits + h,
            capacity: profile.capacity(),
        });
    }
    let up = transmit_energy(profile, bits + h, q, ch, policy)?;
    let down = transmit_energy(profile, bits - h, q, ch, policy)?;
    Ok((up - down) / (2.0 * h))
}

/// Offloading schedule for ratio `theta` through the bursty effective tunnel:
/// the shortest path for [`OffloadPolicy::Optimal`], the tunnel floor for
/// [`OffloadPolicy::Benchmark`].
pub fn bursty_schedule(
    profile: &CpuIdlingProfile,
    arrivals: &ArrivalProcess,
    theta: f64,
    policy: OffloadPolicy,
) -> Result<(FeasibilityTunnel, OffloadSchedule)> {
    let tunnel = bursty_effective_tunnel(profile, arrivals, theta)?;
    let schedule = match policy {
        OffloadPolicy::Optimal => pull_string(&tunnel)?,
        OffloadPolicy::Benchmark => {
            if !tunnel.is_feasible() {
                return Err(Error::InfeasibleTunnel);
            }
            OffloadSchedule::from_cumulative(tunnel.times.clone(), &tunnel.floor)
        }
        _ => {
            return Err(Error::UnsupportedPolicy {
                policy: "bursty arrivals support optimal and benchmark only",
            })
        }
    };
    Ok((tunnel, schedule))
}

fn bursty_transmit(
    profile: &CpuIdlingProfile,
    arrivals: &ArrivalProcess,
    theta: f64,
    ch: &ChannelParams,
    policy: OffloadPolicy,
) -> Result<f64> {
    Ok(bursty_schedule(profile, arrivals, theta, policy)?
        .1
        .energy(ch))
}

/// Minimizes `(1 - theta) L C P_cyc + E_off(theta)` over the ratios for which
/// both the offloading and the local-computing tunnels are non-empty.
///
/// After the golden-section search the objective is checked for midpoint
/// convexity on a grid; on failure the result comes from a fine grid search
/// instead and `convex_fallback` is set.
pub fn optimize_theta(
    problem: &BurstyProblem,
    profile: &CpuIdlingProfile,
    options: PartitionOptions,
) -> Result<PartitionResult> {
    let (arrivals, ch, lc) = (&problem.arrivals, &problem.channel, &problem.local);
    let lo = theta_min(arrivals, lc, problem.horizon);
    let hi = theta_max(profile, arrivals);
    if lo > hi + 1e-12 {
        return Err(Error::InfeasibleRatio { min: lo, max: hi });
    }
    let hi = hi.max(lo);
    let big_l = arrivals.total();
    let mut objective = |theta: f64| -> Result<f64> {
        Ok(local_energy((1.0 - theta) * big_l, lc)
            + bursty_transmit(profile, arrivals, theta, ch, options.policy)?)
    };
    let (mut theta, _) = golden(lo, hi, 1e-6, &mut objective)?;
    let mut fallback = false;
    if hi - lo > 1e-6 {
        let xs: Vec<f64> = (0..=16).map(|i| lo + (hi - lo) * i as f64 / 16.0).collect();
        let fs = xs
            .iter()
            .map(|&x| objective(x))
            .collect::<Result<Vec<_>>>()?;
        let convex = fs
            .windows(3)
            .all(|w| w[1] <= 0.5 * (w[0] + w[2]) + 1e-9 * w[1].abs().max(f64::MIN_POSITIVE));
        if !convex {
            fallback = true;
            theta = bracketed(lo, hi, 1e-6, 1001, &mut objective)?.0;
        }
    }
    let transmit = bursty_transmit(profile, arrivals, theta, ch, options.policy)?;
    let local = local_energy((1.0 - theta) * big_l, lc);
    Ok(PartitionResult {
        offload_bits: theta * big_l,
        ratio: theta,
        total_energy: local + transmit,
        local_energy: local,
        transmit_energy: transmit,
        shortcut: false,
        convex_fallback: fallback,
    })
}

/// Replay of the earliest local-computing schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTrace {
    /// Interval boundaries (arrival instants, plus `0` and `T`).
    pub times: Vec<f64>,
    /// Bits computed locally in each interval.
    pub computed: Vec<f64>,
    /// Bits waiting at each boundary after that boundary's arrival.
    pub backlog: Vec<f64>,
    /// When the last local bit finished, if all did by the deadline.
    pub finish_time: Option<f64>,
}

impl LocalTrace {
    pub fn complete(&self) -> bool {
        self.finish_time.is_some()
    }
}

/// Computes `(1 - theta)` of each arrival locally as early as possible, at
/// `f/C` bits/s, and reports whether all of it finishes by `horizon`.
pub fn verify_local_schedule(
    arrivals: &ArrivalProcess,
    theta: f64,
    lc: &LocalComputeParams,
    horizon: f64,
) -> LocalTrace {
    let share = 1.0 - theta.clamp(0.0, 1.0);
    let rate = lc.rate();
    let mut times = Vec::with_capacity(arrivals.events().len() + 1);
    let mut sizes = Vec::with_capacity(times.capacity());
    if arrivals.events()[0].time > 0.0 {
        times.push(0.0);
        sizes.push(0.0);
    }
    for a in arrivals.events() {
        times.push(a.time.min(horizon));
        sizes.push(share * a.size);
    }
    let total: f64 = sizes.iter().sum();
    let mut computed = Vec::with_capacity(times.len());
    let mut backlog = Vec::with_capacity(times.len());
    let mut b = 0.0;
    let mut done = 0.0;
    let mut finish = 0.0;
    for k in 0..times.len() {
        b += sizes[k];
        backlog.push(b);
        if k + 1 == times.len() {
            break;
        }
        let dt = times[k + 1] - times[k];
        let d = b.min(rate * dt);
        if d > 0.0 {
            finish = times[k] + d / rate;
        }
        b -= d;
        done += d;
        computed.push(d);
    }
    let ok = tol::bits_le(total, done) && finish <= horizon + tol::TIME;
    LocalTrace {
        times,
        computed,
        backlog,
        finish_time: ok.then_some(finish),
    }
}
