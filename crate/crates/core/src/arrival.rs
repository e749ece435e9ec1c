//! Bursty data arrivals and the combined CPU/arrival event timeline.

use alloc::vec::Vec;

use crate::error::{positive, Error, Result};
use crate::profile::{CpuIdlingProfile, CpuState};
use crate::tol;

/// `size` bits become available to the user at `time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    pub time: f64,
    pub size: f64,
}

/// Ordered data arrivals over `[0, T]`, always ending with a zero-size event
/// at the deadline.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalProcess {
    events: Vec<Arrival>,
}

impl ArrivalProcess {
    /// Validates and stores arrival events. A terminal `(T, 0)` event is
    /// appended when missing; a non-empty arrival at `T` is an error.
    pub fn new(events: &[Arrival], horizon: f64) -> Result<Self> {
        positive("horizon", horizon)?;
        let mut out: Vec<Arrival> = Vec::with_capacity(events.len() + 1);
        for (i, a) in events.iter().enumerate() {
            if !(a.size >= 0.0) || !a.size.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "arrival size",
                    value: a.size,
                });
            }
            if !(a.time >= 0.0) || a.time > horizon + tol::TIME {
                return Err(Error::UnorderedArrivals { index: i });
            }
            if let Some(prev) = out.last() {
                if a.time <= prev.time + tol::TIME {
                    return Err(Error::UnorderedArrivals { index: i });
                }
            }
            let time = if (a.time - horizon).abs() <= tol::TIME {
                horizon
            } else {
                a.time
            };
            if time == horizon && a.size > 0.0 {
                return Err(Error::ArrivalAtDeadline { size: a.size });
            }
            out.push(Arrival { time, size: a.size });
        }
        if out.last().map_or(true, |a| a.time < horizon) {
            out.push(Arrival {
                time: horizon,
                size: 0.0,
            });
        }
        Ok(ArrivalProcess { events: out })
    }

    /// All `bits` arriving at `t = 0`.
    pub fn one_shot(bits: f64, horizon: f64) -> Result<Self> {
        Self::new(
            &[Arrival {
                time: 0.0,
                size: bits,
            }],
            horizon,
        )
    }

    pub fn events(&self) -> &[Arrival] {
        &self.events
    }

    pub fn horizon(&self) -> f64 {
        self.events.last().map(|a| a.time).unwrap_or(0.0)
    }

    /// Total input data `L`.
    pub fn total(&self) -> f64 {
        self.events.iter().map(|a| a.size).sum()
    }

    /// Suffix sums `sum_{j >= i} L_j` aligned with the events.
    pub fn suffix_sums(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.events.len()];
        let mut acc = 0.0;
        for (i, a) in self.events.iter().enumerate().rev() {
            acc += a.size;
            out[i] = acc;
        }
        out
    }
}

/// Single ordered sequence of boundaries combining CPU state changes and
/// data arrivals.
///
/// `times[0] = 0` and `times[M] = T`. Interval `k` spans `times[k]..times[k+1]`
/// with CPU state `states[k]`; `arrivals[k]` bits arrive at `times[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    pub times: Vec<f64>,
    pub states: Vec<CpuState>,
    pub arrivals: Vec<f64>,
    pub u_bit: Vec<f64>,
}

impl Timeline {
    pub fn intervals(&self) -> usize {
        self.states.len()
    }

    /// Suffix sums of the arrival sizes.
    pub fn suffix_arrivals(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.arrivals.len()];
        let mut acc = 0.0;
        for i in (0..self.arrivals.len()).rev() {
            acc += self.arrivals[i];
            out[i] = acc;
        }
        out
    }
}

/// Merges the CPU boundaries of `profile` with the arrival instants. Arrival
/// times within 1e-12 s of a CPU boundary collapse onto it.
pub fn merge_events(profile: &CpuIdlingProfile, arrivals: &ArrivalProcess) -> Result<Timeline> {
    let horizon = profile.horizon();
    if (arrivals.horizon() - horizon).abs() > tol::TIME {
        return Err(Error::DurationMismatch {
            expected: horizon,
            actual: arrivals.horizon(),
        });
    }
    let cpu = profile.boundaries();
    let mut times: Vec<f64> = Vec::with_capacity(cpu.len() + arrivals.events().len());
    let mut sizes: Vec<f64> = Vec::with_capacity(times.capacity());
    let (mut i, mut j) = (0, 0);
    let events = arrivals.events();
    while i < cpu.len() || j < events.len() {
        let next_cpu = cpu.get(i).copied().unwrap_or(f64::INFINITY);
        let next_arr = events.get(j).map(|a| a.time).unwrap_or(f64::INFINITY);
        if (next_cpu - next_arr).abs() <= tol::TIME {
            times.push(next_cpu);
            sizes.push(events[j].size);
            i += 1;
            j += 1;
        } else if next_cpu < next_arr {
            times.push(next_cpu);
            sizes.push(0.0);
            i += 1;
        } else {
            times.push(next_arr);
            sizes.push(events[j].size);
            j += 1;
        }
    }
    let states = times[..times.len() - 1]
        .iter()
        .map(|&t| profile.state_at(t))
        .collect();
    let u_bit = times
        .iter()
        .map(|&t| profile.u_bit_at(t))
        .collect::<Result<Vec<_>>>()?;
    Ok(Timeline {
        times,
        states,
        arrivals: sizes,
        u_bit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Epoch;

    fn profile() -> CpuIdlingProfile {
        CpuIdlingProfile::new(&[Epoch::idle(0.05), Epoch::busy(0.05)], 5e9, 500.0, 0.1).unwrap()
    }

    #[test]
    fn terminal_event_appended() {
        let a = ArrivalProcess::new(
            &[Arrival {
                time: 0.03,
                size: 10.0,
            }],
            0.1,
        )
        .unwrap();
        assert_eq!(
            a.events().last(),
            Some(&Arrival {
                time: 0.1,
                size: 0.0
            })
        );
        assert_eq!(a.total(), 10.0);
    }

    #[test]
    fn rejects_data_at_deadline_and_disorder() {
        assert!(matches!(
            ArrivalProcess::new(
                &[Arrival {
                    time: 0.1,
                    size: 5.0
                }],
                0.1
            ),
            Err(Error::ArrivalAtDeadline { .. })
        ));
        assert!(matches!(
            ArrivalProcess::new(
                &[
                    Arrival {
                        time: 0.05,
                        size: 1.0
                    },
                    Arrival {
                        time: 0.04,
                        size: 1.0
                    }
                ],
                0.1
            ),
            Err(Error::UnorderedArrivals { index: 1 })
        ));
        assert!(ArrivalProcess::new(
            &[Arrival {
                time: 0.05,
                size: -1.0
            }],
            0.1
        )
        .is_err());
    }

    #[test]
    fn merge_is_set_union() {
        let a = ArrivalProcess::new(
            &[Arrival {
                time: 0.03,
                size: 7.0,
            }],
            0.1,
        )
        .unwrap();
        let tl = merge_events(&profile(), &a).unwrap();
        assert_eq!(tl.times, vec![0.0, 0.03, 0.05, 0.1]);
        assert_eq!(tl.arrivals, vec![0.0, 7.0, 0.0, 0.0]);
        assert_eq!(
            tl.states,
            vec![CpuState::Idle, CpuState::Idle, CpuState::Busy]
        );
        assert!((tl.u_bit[1] - 3e5).abs() < 1e-6);
    }

    #[test]
    fn no_arrivals_gives_cpu_timeline() {
        let a = ArrivalProcess::new(&[], 0.1).unwrap();
        let p = profile();
        let tl = merge_events(&p, &a).unwrap();
        assert_eq!(tl.times, p.boundaries());
        assert_eq!(tl.u_bit, p.u_bit());
    }

    #[test]
    fn coincident_events_collapse() {
        let a = ArrivalProcess::new(
            &[Arrival {
                time: 0.05 + 1e-13,
                size: 3.0,
            }],
            0.1,
        )
        .unwrap();
        let tl = merge_events(&profile(), &a).unwrap();
        assert_eq!(tl.times, vec![0.0, 0.05, 0.1]);
        assert_eq!(tl.arrivals, vec![0.0, 3.0, 0.0]);
    }
}
