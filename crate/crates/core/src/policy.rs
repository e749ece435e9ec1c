//! Offloading policies for a fixed amount of offloaded data.

use crate::energy::ChannelParams;
use crate::error::{non_negative, Error, Result};
use crate::profile::CpuIdlingProfile;
use crate::schedule::{pull_string, OffloadSchedule};
use crate::tol;
use crate::tunnel::{effective_tunnel, full_utilization_tunnel, FeasibilityTunnel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OffloadPolicy {
    /// Shortest path through the effective tunnel when the buffer can hold
    /// all offloaded data, proportional CPU utilization otherwise.
    Optimal,
    /// Helper cycles shared in a fixed fraction over all idle time.
    Proportional,
    /// Helper computes only in the latest idle time that suffices.
    LazyFirst,
    /// Transmit just in time for the lazy-first helper, at the helper's
    /// computing rate.
    Benchmark,
}

/// A schedule together with the tunnel it was pulled through and the helper
/// profile it should be replayed against.
#[derive(Debug, Clone, PartialEq)]
pub struct OffloadPlan {
    pub profile: CpuIdlingProfile,
    pub tunnel: FeasibilityTunnel,
    pub schedule: OffloadSchedule,
    pub energy: f64,
}

fn check(profile: &CpuIdlingProfile, bits: f64, q: f64) -> Result<f64> {
    non_negative("offload bits", bits)?;
    non_negative("buffer", q)?;
    let capacity = profile.capacity();
    if !tol::bits_le(bits, capacity) {
        return Err(Error::ExceedsCapacity {
            requested: bits,
            capacity,
        });
    }
    Ok(bits.min(capacity))
}

fn pulled(
    profile: CpuIdlingProfile,
    tunnel: FeasibilityTunnel,
    ch: &ChannelParams,
) -> Result<OffloadPlan> {
    let schedule = pull_string(&tunnel)?;
    let energy = schedule.energy(ch);
    Ok(OffloadPlan {
        profile,
        tunnel,
        schedule,
        energy,
    })
}

/// Schedules `bits` of offloading against `profile` with a helper buffer of
/// `q` bits.
pub fn plan_offload(
    profile: &CpuIdlingProfile,
    bits: f64,
    q: f64,
    ch: &ChannelParams,
    policy: OffloadPolicy,
) -> Result<OffloadPlan> {
    let bits = check(profile, bits, q)?;
    let capacity = profile.capacity();
    match policy {
        OffloadPolicy::Optimal => {
            if tol::bits_eq(bits, capacity) {
                pulled(
                    profile.clone(),
                    full_utilization_tunnel(profile, capacity, q)?,
                    ch,
                )
            } else if q >= bits {
                pulled(profile.clone(), effective_tunnel(profile, bits)?, ch)
            } else {
                plan_offload(profile, bits, q, ch, OffloadPolicy::Proportional)
            }
        }
        OffloadPolicy::Proportional => {
            let scaled = profile.proportional(bits)?;
            let tunnel = full_utilization_tunnel(&scaled, scaled.capacity(), q)?;
            pulled(scaled, tunnel, ch)
        }
        OffloadPolicy::LazyFirst => {
            let lazy = profile.lazy(bits)?;
            let tunnel = full_utilization_tunnel(&lazy, lazy.capacity(), q)?;
            pulled(lazy, tunnel, ch)
        }
        OffloadPolicy::Benchmark => {
            let lazy = profile.lazy(bits)?;
            let tunnel = full_utilization_tunnel(&lazy, lazy.capacity(), 0.0)?;
            let schedule = benchmark_schedule(profile, bits)?;
            let energy = schedule.energy(ch);
            Ok(OffloadPlan {
                profile: lazy,
                tunnel,
                schedule,
                energy,
            })
        }
    }
}

/// Minimum transmit energy for offloading `bits` and the schedule achieving it.
pub fn solve_p1(
    profile: &CpuIdlingProfile,
    bits: f64,
    q: f64,
    ch: &ChannelParams,
) -> Result<(OffloadSchedule, f64)> {
    let plan = plan_offload(profile, bits, q, ch, OffloadPolicy::Optimal)?;
    Ok((plan.schedule, plan.energy))
}

/// Cumulative offloading equal to the floor of the effective tunnel: each
/// bit is sent exactly when the lazy-first helper computes it.
pub fn benchmark_schedule(profile: &CpuIdlingProfile, bits: f64) -> Result<OffloadSchedule> {
    let bits = check(profile, bits, 0.0)?;
    let lazy = profile.lazy(bits)?;
    let end = lazy.end_index().unwrap_or(lazy.epochs().len());
    let times = lazy.boundaries()[..=end].to_vec();
    Ok(OffloadSchedule::from_cumulative(
        times,
        &lazy.u_bit()[..=end],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Epoch;
    use crate::schedule::simulate_buffer;

    fn profile() -> CpuIdlingProfile {
        CpuIdlingProfile::new(
            &[Epoch::idle(0.05), Epoch::busy(0.03), Epoch::idle(0.02)],
            5e9,
            500.0,
            0.1,
        )
        .unwrap()
    }

    fn ch() -> ChannelParams {
        ChannelParams::new(1e-6, 1e6, 1e-10).unwrap()
    }

    #[test]
    fn zero_bits_cost_nothing() {
        for policy in [
            OffloadPolicy::Optimal,
            OffloadPolicy::Proportional,
            OffloadPolicy::LazyFirst,
            OffloadPolicy::Benchmark,
        ] {
            let plan = plan_offload(&profile(), 0.0, 1e3, &ch(), policy).unwrap();
            assert_eq!(plan.energy, 0.0);
            assert_eq!(plan.schedule.total(), 0.0);
        }
    }

    #[test]
    fn worked_instance_energy() {
        let c = ch();
        let (_, e) = solve_p1(&profile(), 7e5, 1e9, &c).unwrap();
        let want = 0.05 / 1e-6 * c.power(1e7) + 0.05 / 1e-6 * c.power(4e6);
        assert!((e - want).abs() <= 1e-9 * want);
    }

    #[test]
    fn every_policy_replays_cleanly() {
        let p = profile();
        for q in [0.0, 3e4, 2e5, 1e9] {
            for policy in [
                OffloadPolicy::Optimal,
                OffloadPolicy::Proportional,
                OffloadPolicy::LazyFirst,
                OffloadPolicy::Benchmark,
            ] {
                for bits in [1e5, 4e5, 7e5] {
                    let plan = plan_offload(&p, bits, q, &ch(), policy).unwrap();
                    assert!((plan.schedule.total() - bits).abs() < 1e-6);
                    let buffer = if policy == OffloadPolicy::Benchmark {
                        0.0
                    } else {
                        q
                    };
                    let trace = simulate_buffer(&plan.schedule, &plan.profile, buffer);
                    assert!(
                        trace.deadline_met && !trace.overflow,
                        "{policy:?} q={q} l={bits}"
                    );
                }
            }
        }
    }

    #[test]
    fn benchmark_is_linear_and_never_better() {
        let p = profile();
        let c = ch();
        let rate = p.idle_rate();
        for bits in [1e5, 3e5, 7e5] {
            let plan = plan_offload(&p, bits, 1e9, &c, OffloadPolicy::Benchmark).unwrap();
            let want = bits / rate * c.power(rate) / c.h_sq;
            assert!((plan.energy - want).abs() <= 1e-9 * want);
            let (_, opt) = solve_p1(&p, bits, 1e9, &c).unwrap();
            assert!(opt <= plan.energy * (1.0 + 1e-12));
        }
    }

    #[test]
    fn lazy_first_with_large_buffer_is_optimal() {
        let p = profile();
        for bits in [1e5, 4e5, 6.5e5] {
            let lazy = plan_offload(&p, bits, 1e9, &ch(), OffloadPolicy::LazyFirst)
                .unwrap()
                .energy;
            let (_, opt) = solve_p1(&p, bits, 1e9, &ch()).unwrap();
            assert!((lazy - opt).abs() <= 1e-9 * opt, "{lazy} vs {opt}");
        }
    }

    #[test]
    fn exceeding_capacity_fails() {
        assert!(matches!(
            solve_p1(&profile(), 8e5, 1e9, &ch()),
            Err(Error::ExceedsCapacity { .. })
        ));
    }
}
