//! Shortest-path offloading schedules through a feasibility tunnel, their
//! optimality check and the helper buffer recursion.

use alloc::vec::Vec;

use crate::energy::ChannelParams;
use crate::error::{Error, Result};
use crate::profile::{CpuIdlingProfile, CpuState};
use crate::tol;
use crate::tunnel::FeasibilityTunnel;

/// Bits offloaded in each interval `times[k]..times[k+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OffloadSchedule {
    pub times: Vec<f64>,
    pub bits: Vec<f64>,
}

impl OffloadSchedule {
    /// Schedule from a cumulative curve sampled at `times`.
    pub fn from_cumulative(times: Vec<f64>, cumulative: &[f64]) -> Self {
        let bits = cumulative
            .windows(2)
            .map(|w| (w[1] - w[0]).max(0.0))
            .collect();
        OffloadSchedule { times, bits }
    }

    pub fn durations(&self) -> Vec<f64> {
        self.times.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Constant rate in each interval, bits/s.
    pub fn rates(&self) -> Vec<f64> {
        self.bits
            .iter()
            .zip(self.times.windows(2))
            .map(|(&b, w)| b / (w[1] - w[0]))
            .collect()
    }

    /// Bits sent by each boundary, starting with 0.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.bits.len() + 1);
        let mut acc = 0.0;
        out.push(acc);
        for &b in &self.bits {
            acc += b;
            out.push(acc);
        }
        out
    }

    pub fn total(&self) -> f64 {
        self.bits.iter().sum()
    }

    /// Transmit energy over `ch`.
    pub fn energy(&self, ch: &ChannelParams) -> f64 {
        self.bits
            .iter()
            .zip(self.times.windows(2))
            .map(|(&b, w)| ch.energy(b, w[1] - w[0]))
            .sum()
    }

    /// Euclidean length of the cumulative curve in the (seconds, bits) plane.
    pub fn path_length(&self) -> f64 {
        self.bits
            .iter()
            .zip(self.times.windows(2))
            .map(|(&b, w)| libm::hypot(w[1] - w[0], b))
            .sum()
    }
}

/// Taut string from `(0, 0)` to `(t_m, total)` through the tunnel.
///
/// Each segment is extended from its anchor while some line stays within
/// every later floor and ceiling. When the window of admissible slopes closes,
/// the path bends at the earliest vertex that limited it: on the ceiling if
/// a floor rose above the window, on the floor otherwise.
pub fn pull_string(tunnel: &FeasibilityTunnel) -> Result<OffloadSchedule> {
    if !tunnel.is_feasible() {
        return Err(Error::InfeasibleTunnel);
    }
    let t = &tunnel.times;
    let m = t.len() - 1;
    let (floor, ceiling): (Vec<f64>, Vec<f64>) = (0..=m)
        .map(|k| {
            if k == m {
                (tunnel.total, tunnel.total)
            } else if tunnel.floor[k] > tunnel.ceiling[k] {
                let mid = 0.5 * (tunnel.floor[k] + tunnel.ceiling[k]);
                (mid, mid)
            } else {
                (tunnel.floor[k], tunnel.ceiling[k])
            }
        })
        .unzip();

    let mut y = alloc::vec![0.0; m + 1];
    let mut a = 0;
    while a < m {
        let ya = y[a];
        let (mut lo, mut lo_at) = (f64::NEG_INFINITY, a);
        let (mut hi, mut hi_at) = (f64::INFINITY, a);
        let mut k = a + 1;
        let (next, y_next, slope) = loop {
            let dt = t[k] - t[a];
            let s_lo = (floor[k] - ya) / dt;
            let s_hi = (ceiling[k] - ya) / dt;
            if s_lo > hi {
                break (hi_at, ceiling[hi_at], hi);
            }
            if s_hi < lo {
                break (lo_at, floor[lo_at], lo);
            }
            if s_lo > lo {
                lo = s_lo;
                lo_at = k;
            }
            if s_hi < hi {
                hi = s_hi;
                hi_at = k;
            }
            if k == m {
                break (m, tunnel.total, (tunnel.total - ya) / dt);
            }
            k += 1;
        };
        for j in a + 1..next {
            y[j] = ya + slope * (t[j] - t[a]);
        }
        y[next] = y_next;
        a = next;
    }
    Ok(OffloadSchedule::from_cumulative(t.clone(), &y))
}

/// A reason a schedule is not the shortest path through a tunnel.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    LengthMismatch {
        expected: usize,
        actual: usize,
    },
    NegativeBits {
        interval: usize,
    },
    OutsideTunnel {
        boundary: usize,
        cumulative: f64,
        floor: f64,
        ceiling: f64,
    },
    WrongTotal {
        cumulative: f64,
        total: f64,
    },
    /// Rate rises where the buffer is not full or the boundary neither starts
    /// an idle epoch nor brings new data.
    Increase {
        boundary: usize,
    },
    /// Rate falls where the buffer is not empty or the boundary does not end
    /// an idle epoch.
    Decrease {
        boundary: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OptimalityReport {
    pub violations: Vec<Violation>,
}

impl OptimalityReport {
    pub fn is_feasible(&self) -> bool {
        !self.violations.iter().any(|v| {
            matches!(
                v,
                Violation::LengthMismatch { .. }
                    | Violation::NegativeBits { .. }
                    | Violation::OutsideTunnel { .. }
                    | Violation::WrongTotal { .. }
            )
        })
    }

    pub fn is_optimal(&self) -> bool {
        self.violations.is_empty()
    }
}

const BIND: f64 = 1e-6;

/// Checks the rate-change structure of the shortest path.
///
/// Feasibility is checked first; an infeasible schedule is reported as such
/// and not examined further. Rates may rise only where the ceiling binds
/// (buffer full, or all data so far sent) at a busy-to-idle boundary or an
/// arrival, and fall only where the floor binds (buffer empty) at an
/// idle-to-busy boundary.
pub fn verify_optimality(
    schedule: &OffloadSchedule,
    tunnel: &FeasibilityTunnel,
    q: f64,
) -> OptimalityReport {
    let mut report = OptimalityReport::default();
    let m = tunnel.times.len() - 1;
    if schedule.bits.len() != m || schedule.times.len() != m + 1 {
        report.violations.push(Violation::LengthMismatch {
            expected: m,
            actual: schedule.bits.len(),
        });
        return report;
    }
    for (k, &b) in schedule.bits.iter().enumerate() {
        if b < 0.0 {
            report
                .violations
                .push(Violation::NegativeBits { interval: k });
        }
    }
    let cum = schedule.cumulative();
    for k in 0..=m {
        let (f, c) = (tunnel.floor[k], tunnel.ceiling[k]);
        if !tol::bits_le(f, cum[k]) || !tol::bits_le(cum[k], c) {
            report.violations.push(Violation::OutsideTunnel {
                boundary: k,
                cumulative: cum[k],
                floor: f,
                ceiling: c,
            });
        }
    }
    if !tol::bits_eq(cum[m], tunnel.total) {
        report.violations.push(Violation::WrongTotal {
            cumulative: cum[m],
            total: tunnel.total,
        });
    }
    if !report.is_feasible() {
        return report;
    }
    let rates = schedule.rates();
    let durations = schedule.durations();
    for k in 1..m {
        let dr = rates[k] - rates[k - 1];
        if dr.abs() * durations[k - 1].min(durations[k]) <= BIND {
            continue;
        }
        let (before, after) = (tunnel.states[k - 1], tunnel.states[k]);
        if dr > 0.0 {
            let cap = (tunnel.floor[k] + q).min(tunnel.ceiling[k]);
            let full = cum[k] >= cap - BIND;
            let opens =
                (before == CpuState::Busy && after == CpuState::Idle) || tunnel.arrivals[k] > 0.0;
            if !(full && opens) {
                report.violations.push(Violation::Increase { boundary: k });
            }
        } else {
            let empty = cum[k] <= tunnel.floor[k] + BIND;
            let closes = before == CpuState::Idle && after == CpuState::Busy;
            if !(empty && closes) {
                report.violations.push(Violation::Decrease { boundary: k });
            }
        }
    }
    report
}

/// Helper-side replay of a schedule: bits computed and left buffered.
#[derive(Debug, Clone, PartialEq)]
pub struct BufferTrace {
    /// Bits computed in each interval.
    pub computed: Vec<f64>,
    /// Buffered bits at each boundary, starting with 0.
    pub backlog: Vec<f64>,
    /// Some backlog exceeded the buffer size.
    pub overflow: bool,
    /// Every offloaded bit was computed by the end of the schedule.
    pub deadline_met: bool,
}

impl BufferTrace {
    pub fn max_backlog(&self) -> f64 {
        self.backlog.iter().copied().fold(0.0, f64::max)
    }
}

/// Replays `d_k = min(B_{k-1} + l_k, idle capacity in interval k)` against
/// `profile` with a buffer of `q` bits.
pub fn simulate_buffer(
    schedule: &OffloadSchedule,
    profile: &CpuIdlingProfile,
    q: f64,
) -> BufferTrace {
    let horizon = profile.horizon();
    let u = |t: f64| profile.u_bit_at(t.clamp(0.0, horizon)).unwrap_or(0.0);
    let mut computed = Vec::with_capacity(schedule.bits.len());
    let mut backlog = Vec::with_capacity(schedule.bits.len() + 1);
    let mut b = 0.0;
    backlog.push(b);
    let mut overflow = false;
    for (k, &l) in schedule.bits.iter().enumerate() {
        let cap = u(schedule.times[k + 1]) - u(schedule.times[k]);
        let d = (b + l).min(cap);
        b = b + l - d;
        if b.abs() <= tol::bits(b, l) {
            b = 0.0;
        }
        overflow |= !tol::bits_le(b, q);
        computed.push(d);
        backlog.push(b);
    }
    BufferTrace {
        computed,
        backlog,
        overflow,
        deadline_met: tol::bits_le(b, 0.0),
    }
}
