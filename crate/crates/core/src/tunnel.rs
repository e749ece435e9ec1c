//! Feasibility tunnels: cumulative floor and ceiling bounds on the bits a
//! schedule may have sent by each boundary.

use alloc::vec::Vec;

use crate::arrival::{merge_events, ArrivalProcess};
use crate::energy::LocalComputeParams;
use crate::error::{non_negative, Error, Result};
use crate::profile::{CpuIdlingProfile, CpuState};
use crate::tol;

/// Cumulative bounds at boundaries `t_0 = 0 < ... < t_m`.
///
/// Interval `k` is `t_k..t_{k+1}` with state `states[k]`. Any path starting
/// at `(0, 0)` that stays within `[floor_k, ceiling_k]` at every boundary and
/// ends at `(t_m, total)` is a feasible cumulative offloading curve. The last
/// floor and ceiling entries both hold the endpoint unless the instance is
/// infeasible.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityTunnel {
    pub times: Vec<f64>,
    pub floor: Vec<f64>,
    pub ceiling: Vec<f64>,
    pub states: Vec<CpuState>,
    /// Bits arriving at each boundary (zero for one-shot tunnels).
    pub arrivals: Vec<f64>,
    pub total: f64,
}

impl FeasibilityTunnel {
    /// Number of intervals.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("tunnel has boundaries")
    }

    pub fn durations(&self) -> Vec<f64> {
        self.times.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Ceiling not below floor at every boundary, within bit tolerance.
    pub fn is_feasible(&self) -> bool {
        self.floor
            .iter()
            .zip(&self.ceiling)
            .all(|(&f, &c)| tol::bits_le(f, c))
    }
}

fn zero_tunnel(profile: &CpuIdlingProfile) -> FeasibilityTunnel {
    let n = profile.epochs().len();
    FeasibilityTunnel {
        times: profile.boundaries().to_vec(),
        floor: alloc::vec![0.0; n + 1],
        ceiling: alloc::vec![0.0; n + 1],
        states: profile.epochs().iter().map(|e| e.state).collect(),
        arrivals: alloc::vec![0.0; n + 1],
        total: 0.0,
    }
}

/// Builds a one-shot tunnel over the epochs through the last idle one with
/// the given per-boundary floor and ceiling rules.
fn one_shot(
    profile: &CpuIdlingProfile,
    total: f64,
    floor: impl Fn(f64) -> f64,
    ceiling: impl Fn(f64) -> f64,
) -> FeasibilityTunnel {
    let Some(end) = profile.end_index() else {
        return zero_tunnel(profile);
    };
    let u = &profile.u_bit()[..=end];
    let mut fl: Vec<f64> = u.iter().map(|&x| floor(x)).collect();
    let mut ce: Vec<f64> = u.iter().map(|&x| ceiling(x)).collect();
    fl[end] = total;
    ce[end] = total;
    FeasibilityTunnel {
        times: profile.boundaries()[..=end].to_vec(),
        floor: fl,
        ceiling: ce,
        states: profile.epochs()[..end].iter().map(|e| e.state).collect(),
        arrivals: alloc::vec![0.0; end + 1],
        total,
    }
}

/// Tunnel when all idle capacity `U_bit,K` is offloaded and the helper buffer
/// holds `q` bits: floor `U_bit,k`, ceiling `min(U_bit,k + Q, l)`.
pub fn full_utilization_tunnel(
    profile: &CpuIdlingProfile,
    bits: f64,
    q: f64,
) -> Result<FeasibilityTunnel> {
    non_negative("buffer", q)?;
    let capacity = profile.capacity();
    if !tol::bits_eq(bits, capacity) {
        return Err(Error::NotFullUtilization {
            requested: bits,
            capacity,
        });
    }
    Ok(one_shot(
        profile,
        capacity,
        |u| u,
        |u| (u + q).min(capacity),
    ))
}

/// Large-buffer tunnel for offloading `bits <= U_bit,K`: the floor is the
/// profile lowered by the unused capacity, the ceiling is `bits`.
pub fn effective_tunnel(profile: &CpuIdlingProfile, bits: f64) -> Result<FeasibilityTunnel> {
    non_negative("offload bits", bits)?;
    let capacity = profile.capacity();
    if !tol::bits_le(bits, capacity) {
        return Err(Error::ExceedsCapacity {
            requested: bits,
            capacity,
        });
    }
    let bits = bits.min(capacity);
    let delta = capacity - bits;
    Ok(one_shot(profile, bits, |u| (u - delta).max(0.0), |_| bits))
}

/// Scaled profile used by proportional CPU utilization.
pub fn proportional_profile(profile: &CpuIdlingProfile, bits: f64) -> Result<CpuIdlingProfile> {
    profile.proportional(bits)
}

struct Merged {
    times: Vec<f64>,
    states: Vec<CpuState>,
    arrivals: Vec<f64>,
    u_bit: Vec<f64>,
    /// Bits that arrived strictly before each boundary.
    prefix: Vec<f64>,
}

fn merged_until_end(profile: &CpuIdlingProfile, arrivals: &ArrivalProcess) -> Result<Merged> {
    let tl = merge_events(profile, arrivals)?;
    let end_time = profile.t_end().unwrap_or(0.0);
    let m = if profile.is_zero_capacity() {
        tl.times.len() - 1
    } else {
        tl.times
            .iter()
            .position(|&t| t >= end_time)
            .expect("t_end is a boundary")
    };
    let mut prefix = Vec::with_capacity(m + 1);
    let mut acc = 0.0;
    for &a in &tl.arrivals[..=m] {
        prefix.push(acc);
        acc += a;
    }
    Ok(Merged {
        times: tl.times[..=m].to_vec(),
        states: tl.states[..m].to_vec(),
        arrivals: tl.arrivals[..=m].to_vec(),
        u_bit: tl.u_bit[..=m].to_vec(),
        prefix,
    })
}

fn check_ratio(theta: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&theta) {
        Ok(theta)
    } else {
        Err(Error::InvalidParameter {
            name: "theta",
            value: theta,
        })
    }
}

fn bursty(
    profile: &CpuIdlingProfile,
    arrivals: &ArrivalProcess,
    theta: f64,
    floor: impl Fn(f64) -> f64,
) -> Result<FeasibilityTunnel> {
    check_ratio(theta)?;
    let m = merged_until_end(profile, arrivals)?;
    let total = theta * arrivals.total();
    let last = m.times.len() - 1;
    let mut fl: Vec<f64> = m.u_bit.iter().map(|&u| floor(u)).collect();
    let mut ce: Vec<f64> = m.prefix.iter().map(|&p| theta * p).collect();
    fl[last] = total;
    ce[last] = ce[last].min(total);
    Ok(FeasibilityTunnel {
        times: m.times,
        floor: fl,
        ceiling: ce,
        states: m.states,
        arrivals: m.arrivals.iter().map(|&a| theta * a).collect(),
        total,
    })
}

/// Bursty-arrival tunnel under full utilization: floor `U_bit,k`, ceiling
/// `theta` times the data that arrived strictly before each boundary.
///
/// The endpoint is `theta * L` at the end of the last idle epoch, so data
/// arriving at or after that instant leaves the tunnel infeasible.
pub fn bursty_tunnel(
    profile: &CpuIdlingProfile,
    arrivals: &ArrivalProcess,
    theta: f64,
) -> Result<FeasibilityTunnel> {
    bursty(profile, arrivals, theta, |u| u)
}

/// Bursty-arrival tunnel with the floor lowered by the unused capacity
/// `U_bit,K - theta L`.
pub fn bursty_effective_tunnel(
    profile: &CpuIdlingProfile,
    arrivals: &ArrivalProcess,
    theta: f64,
) -> Result<FeasibilityTunnel> {
    let delta = profile.capacity() - theta * arrivals.total();
    bursty(profile, arrivals, theta, |u| (u - delta).max(0.0))
}

/// Tunnel for the bits `(1 - theta) L` computed by the user's own CPU, on
/// the arrival instants over `[0, T]`.
pub fn local_compute_tunnel(
    arrivals: &ArrivalProcess,
    theta: f64,
    lc: &LocalComputeParams,
    horizon: f64,
) -> Result<FeasibilityTunnel> {
    check_ratio(theta)?;
    if (arrivals.horizon() - horizon).abs() > tol::TIME {
        return Err(Error::DurationMismatch {
            expected: horizon,
            actual: arrivals.horizon(),
        });
    }
    let share = 1.0 - theta;
    let total = share * arrivals.total();
    let delta = horizon * lc.rate() - total;
    let mut times = Vec::with_capacity(arrivals.events().len() + 1);
    let mut sizes = Vec::with_capacity(times.capacity());
    if arrivals.events()[0].time > 0.0 {
        times.push(0.0);
        sizes.push(0.0);
    }
    for a in arrivals.events() {
        times.push(a.time);
        sizes.push(share * a.size);
    }
    let mut acc = 0.0;
    let mut ceiling = Vec::with_capacity(times.len());
    for &s in &sizes {
        ceiling.push(acc);
        acc += s;
    }
    let mut floor: Vec<f64> = times
        .iter()
        .map(|&t| (t * lc.rate() - delta).max(0.0))
        .collect();
    let last = times.len() - 1;
    floor[last] = total;
    ceiling[last] = ceiling[last].min(total);
    Ok(FeasibilityTunnel {
        states: alloc::vec![CpuState::Idle; last],
        times,
        floor,
        ceiling,
        arrivals: sizes,
        total,
    })
}

/// Largest offloading ratio for which the bursty effective tunnel is
/// non-empty: `min{1, min_i (U_bit,K - U_bit(t_i)) / S_i}` over arrival
/// instants `t_i`, with `S_i` the data arriving at or after `t_i`.
pub fn theta_max(profile: &CpuIdlingProfile, arrivals: &ArrivalProcess) -> f64 {
    let capacity = profile.capacity();
    let suffix = arrivals.suffix_sums();
    let mut best: f64 = 1.0;
    for (a, &s) in arrivals.events().iter().zip(&suffix) {
        if s <= 0.0 {
            continue;
        }
        let room = capacity - profile.u_bit_at(a.time).unwrap_or(capacity);
        best = best.min(room.max(0.0) / s);
    }
    best
}

/// Smallest offloading ratio for which the local-computing tunnel is
/// non-empty: `[1 - min_i (f (T - t_i) / C) / S_i]^+`.
pub fn theta_min(arrivals: &ArrivalProcess, lc: &LocalComputeParams, horizon: f64) -> f64 {
    let suffix = arrivals.suffix_sums();
    let mut ratio = f64::INFINITY;
    for (a, &s) in arrivals.events().iter().zip(&suffix) {
        if s <= 0.0 {
            continue;
        }
        ratio = ratio.min(lc.rate() * (horizon - a.time) / s);
    }
    (1.0 - ratio).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrival::Arrival;
    use crate::profile::Epoch;

    fn profile() -> CpuIdlingProfile {
        CpuIdlingProfile::new(
            &[Epoch::idle(0.05), Epoch::busy(0.03), Epoch::idle(0.02)],
            5e9,
            500.0,
            0.1,
        )
        .unwrap()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len()
            && a.iter()
                .zip(b)
                .all(|(x, y)| (x - y).abs() <= 1e-6 * y.abs().max(1.0))
    }

    #[test]
    fn full_utilization_bounds() {
        let p = profile();
        let t = full_utilization_tunnel(&p, 7e5, 1e6).unwrap();
        assert!(close(&t.floor, &[0.0, 5e5, 5e5, 7e5]));
        assert!(close(&t.ceiling, &[7e5, 7e5, 7e5, 7e5]));
        assert_eq!(t.end_time(), 0.1);
        let small = full_utilization_tunnel(&p, 7e5, 1e5).unwrap();
        assert!(close(&small.ceiling, &[1e5, 6e5, 6e5, 7e5]));
        let zero = full_utilization_tunnel(&p, 7e5, 0.0).unwrap();
        assert_eq!(zero.floor, zero.ceiling);
        assert!(matches!(
            full_utilization_tunnel(&p, 6e5, 1e6),
            Err(Error::NotFullUtilization { .. })
        ));
    }

    #[test]
    fn effective_bounds() {
        let p = profile();
        let full = effective_tunnel(&p, 7e5).unwrap();
        assert_eq!(full, full_utilization_tunnel(&p, 7e5, 7e5).unwrap());
        let t = effective_tunnel(&p, 6e5).unwrap();
        assert!(close(&t.floor, &[0.0, 4e5, 4e5, 6e5]));
        assert!(close(&t.ceiling, &[6e5; 4]));
        let z = effective_tunnel(&p, 0.0).unwrap();
        assert!(z.floor.iter().chain(&z.ceiling).all(|&x| x == 0.0));
        assert!(matches!(
            effective_tunnel(&p, 8e5),
            Err(Error::ExceedsCapacity { .. })
        ));
    }

    #[test]
    fn bursty_single_arrival_is_one_shot() {
        let p = profile();
        let a = ArrivalProcess::one_shot(7e5, 0.1).unwrap();
        let b = bursty_tunnel(&p, &a, 1.0).unwrap();
        let o = full_utilization_tunnel(&p, 7e5, 7e5).unwrap();
        assert_eq!(b.times, o.times);
        assert_eq!(b.floor, o.floor);
        // the arrival at t = 0 is not yet offloadable at t = 0
        assert_eq!(b.ceiling[0], 0.0);
        assert_eq!(&b.ceiling[1..], &o.ceiling[1..]);
        let e =
            bursty_effective_tunnel(&p, &ArrivalProcess::one_shot(6e5, 0.1).unwrap(), 1.0).unwrap();
        assert_eq!(e.floor, effective_tunnel(&p, 6e5).unwrap().floor);
    }

    #[test]
    fn bursty_two_arrivals() {
        let p = profile();
        let a = ArrivalProcess::new(
            &[
                Arrival {
                    time: 0.0,
                    size: 4e5,
                },
                Arrival {
                    time: 0.04,
                    size: 4e5,
                },
            ],
            0.1,
        )
        .unwrap();
        let t = bursty_tunnel(&p, &a, 0.875).unwrap();
        assert!(close(&t.times, &[0.0, 0.04, 0.05, 0.08, 0.1]));
        assert!(close(&t.ceiling, &[0.0, 3.5e5, 7e5, 7e5, 7e5]));
        assert!(close(&t.floor, &[0.0, 4e5, 5e5, 5e5, 7e5]));
        // floor 4e5 at 0.04 exceeds the ceiling 3.5e5 there
        assert!(!t.is_feasible());
        assert!(theta_max(&p, &a) < 0.875);
        let e = bursty_effective_tunnel(&p, &a, theta_max(&p, &a)).unwrap();
        assert!(e.is_feasible());
    }

    #[test]
    fn bursty_zero_ratio() {
        let p = profile();
        let a = ArrivalProcess::new(
            &[Arrival {
                time: 0.02,
                size: 3e5,
            }],
            0.1,
        )
        .unwrap();
        let e = bursty_effective_tunnel(&p, &a, 0.0).unwrap();
        assert!(e.floor.iter().chain(&e.ceiling).all(|&x| x == 0.0));
        assert!(e.is_feasible());
    }

    #[test]
    fn local_tunnel_cases() {
        let lc = LocalComputeParams::new(1e9, 500.0, 1e-28).unwrap();
        let a = ArrivalProcess::new(
            &[
                Arrival {
                    time: 0.0,
                    size: 1e5,
                },
                Arrival {
                    time: 0.05,
                    size: 2e5,
                },
            ],
            0.1,
        )
        .unwrap();
        let t = local_compute_tunnel(&a, 1.0, &lc, 0.1).unwrap();
        assert!(t.floor.iter().chain(&t.ceiling).all(|&x| x == 0.0));
        let slow = LocalComputeParams::new(1e6, 0.5, 1e-28).unwrap();
        assert_eq!(slow.rate(), 2e6);
        assert!(!local_compute_tunnel(&a, 0.0, &slow, 0.1)
            .unwrap()
            .is_feasible());
        let one = ArrivalProcess::one_shot(3e5, 0.1).unwrap();
        // capacity 2e5: feasible iff (1 - theta) 3e5 <= 2e5
        assert!(local_compute_tunnel(&one, 0.34, &slow, 0.1)
            .unwrap()
            .is_feasible());
        assert!(!local_compute_tunnel(&one, 0.32, &slow, 0.1)
            .unwrap()
            .is_feasible());
        assert!((theta_min(&one, &slow, 0.1) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn theta_bounds_limits() {
        let p = profile();
        assert_eq!(
            theta_max(&p, &ArrivalProcess::one_shot(5e5, 0.1).unwrap()),
            1.0
        );
        let late = CpuIdlingProfile::new(&[Epoch::idle(0.05), Epoch::busy(0.05)], 5e9, 500.0, 0.1)
            .unwrap();
        let a = ArrivalProcess::new(
            &[Arrival {
                time: 0.05,
                size: 1e6,
            }],
            0.1,
        )
        .unwrap();
        assert_eq!(theta_max(&late, &a), 0.0);
        let fast = LocalComputeParams::new(1e12, 500.0, 1e-28).unwrap();
        assert_eq!(theta_min(&a, &fast, 0.1), 0.0);
    }

    #[test]
    fn zero_capacity_profile() {
        let p = CpuIdlingProfile::new(&[Epoch::busy(0.1)], 5e9, 500.0, 0.1).unwrap();
        let t = effective_tunnel(&p, 0.0).unwrap();
        assert_eq!(t.times, vec![0.0, 0.1]);
        assert!(t.is_feasible());
        assert!(effective_tunnel(&p, 1.0).is_err());
    }
}
