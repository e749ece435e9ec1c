//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use cocompute_core::tunnel::{
    bursty_effective_tunnel, effective_tunnel, full_utilization_tunnel, theta_max,
};
use cocompute_core::{
    Arrival, ArrivalProcess, ChannelParams, CpuIdlingProfile, Epoch, FeasibilityTunnel,
};
use rand::Rng;

pub const T: f64 = 0.1;
pub const F_H: f64 = 5e9;
pub const C: f64 = 500.0;

pub fn channel() -> ChannelParams {
    ChannelParams::new(1e-6, 1e6, 1e-10).unwrap()
}

/// Alternating epochs over `[0, T]` with at least one idle epoch.
pub fn profile<R: Rng>(rng: &mut R, max_epochs: usize) -> CpuIdlingProfile {
    let n = rng.gen_range(1..=max_epochs);
    let idle_first = n == 1 || rng.gen_bool(0.5);
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let s: f64 = w.iter().sum();
    let epochs: Vec<Epoch> = w
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let d = T * x / s;
            if (i % 2 == 0) == idle_first {
                Epoch::idle(d)
            } else {
                Epoch::busy(d)
            }
        })
        .collect();
    CpuIdlingProfile::new(&epochs, F_H, C, T).unwrap()
}

pub fn arrivals<R: Rng>(
    rng: &mut R,
    until: f64,
    max_events: usize,
    mean_size: f64,
) -> ArrivalProcess {
    let n = rng.gen_range(1..=max_events);
    let mut times: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 && rng.gen_bool(0.5) {
                0.0
            } else {
                rng.gen_range(0.0..until)
            }
        })
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    let events: Vec<Arrival> = times
        .iter()
        .map(|&time| Arrival {
            time,
            size: rng.gen_range(0.2..1.8) * mean_size,
        })
        .collect();
    ArrivalProcess::new(&events, T).unwrap()
}

/// A feasible tunnel, the buffer it was built for and the helper profile a
/// schedule through it is replayed against.
pub struct Instance {
    pub tunnel: FeasibilityTunnel,
    pub buffer: f64,
    pub replay: CpuIdlingProfile,
}

pub fn instance<R: Rng>(rng: &mut R, max_epochs: usize) -> Instance {
    let p = profile(rng, max_epochs);
    let cap = p.capacity();
    let u: f64 = rng.gen();
    let (tunnel, buffer, replay) = match rng.gen_range(0..5) {
        0 => {
            let q = [0.0, cap * u * u, 1e12][rng.gen_range(0..3)];
            (full_utilization_tunnel(&p, cap, q).unwrap(), q, p)
        }
        1 => (effective_tunnel(&p, cap * u).unwrap(), f64::INFINITY, p),
        2 => {
            let l = cap * u.max(1e-3);
            let q = l * rng.gen::<f64>();
            let s = p.proportional(l).unwrap();
            (full_utilization_tunnel(&s, s.capacity(), q).unwrap(), q, s)
        }
        3 => {
            let l = cap * u.max(1e-3);
            let q = l * rng.gen::<f64>();
            let s = p.lazy(l).unwrap();
            (full_utilization_tunnel(&s, s.capacity(), q).unwrap(), q, s)
        }
        _ => {
            let a = arrivals(rng, p.t_end().unwrap(), 4, cap / 3.0);
            let theta = theta_max(&p, &a) * rng.gen::<f64>();
            (
                bursty_effective_tunnel(&p, &a, theta).unwrap(),
                f64::INFINITY,
                p,
            )
        }
    };
    Instance {
        tunnel,
        buffer,
        replay,
    }
}

/// Random monotone cumulative curve inside the tunnel.
pub fn random_path<R: Rng>(rng: &mut R, t: &FeasibilityTunnel) -> Vec<f64> {
    let m = t.times.len() - 1;
    let mut y = vec![0.0; m + 1];
    for k in 1..m {
        let lo = t.floor[k].max(y[k - 1]);
        let hi = t.ceiling[k].max(lo);
        y[k] = lo + (hi - lo) * rng.gen::<f64>();
    }
    y[m] = t.total;
    y
}
