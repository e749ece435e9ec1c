//! Independent minimum-energy solver for small tunnels, used to cross-check
//! the string-pulling solution.

use alloc::vec::Vec;

use crate::energy::ChannelParams;
use crate::error::{Error, Result};
use crate::schedule::OffloadSchedule;
use crate::tunnel::FeasibilityTunnel;

const MAX_ITERATIONS: usize = 200_000;

fn energy(y: &[f64], dt: &[f64], ch: &ChannelParams) -> f64 {
    y.windows(2)
        .zip(dt)
        .map(|(w, &d)| ch.energy(w[1] - w[0], d))
        .sum()
}

/// Minimizes transmit energy over cumulative curves inside `tunnel` by
/// accelerated projected gradient descent on the interior cumulative values.
///
/// Steps are scaled by the Hessian diagonal and the projection clamps each
/// value to its `[floor, ceiling]` box. Momentum restarts whenever the step
/// points uphill; the step length halves if the energy rises. Iterates stop
/// once the scaled projected step is at most `1e-10 max(total, 1)` bits.
pub fn convex_oracle(tunnel: &FeasibilityTunnel, ch: &ChannelParams) -> Result<OffloadSchedule> {
    if !tunnel.is_feasible() {
        return Err(Error::InfeasibleTunnel);
    }
    let m = tunnel.times.len() - 1;
    let dt = tunnel.durations();
    let lo: Vec<f64> = (0..=m)
        .map(|k| {
            if k == m {
                tunnel.total
            } else {
                tunnel.floor[k].min(tunnel.ceiling[k])
            }
        })
        .collect();
    let hi: Vec<f64> = (0..=m)
        .map(|k| {
            if k == m {
                tunnel.total
            } else {
                tunnel.ceiling[k].max(tunnel.floor[k])
            }
        })
        .collect();
    let project = |y: &mut [f64]| {
        y[0] = 0.0;
        for k in 1..m {
            y[k] = y[k].clamp(lo[k], hi[k]);
        }
        y[m] = tunnel.total;
    };
    let stop = 1e-10 * tunnel.total.abs().max(1.0);

    // start from the straight line, clamped
    let mut y: Vec<f64> = tunnel
        .times
        .iter()
        .map(|&t| tunnel.total * t / tunnel.times[m])
        .collect();
    project(&mut y);
    if m == 1 {
        return Ok(OffloadSchedule::from_cumulative(tunnel.times.clone(), &y));
    }

    let gradient = |y: &[f64], grad: &mut [f64], scale: &mut [f64]| {
        let rates: Vec<f64> = y
            .windows(2)
            .zip(&dt)
            .map(|(w, &d)| (w[1] - w[0]) / d)
            .collect();
        for k in 1..m {
            grad[k] = (ch.power_derivative(rates[k - 1]) - ch.power_derivative(rates[k])) / ch.h_sq;
            scale[k] = (ch.power_curvature(rates[k - 1]) / dt[k - 1]
                + ch.power_curvature(rates[k]) / dt[k])
                / ch.h_sq;
        }
    };

    let mut x = y.clone();
    let mut z = y;
    let mut e_x = energy(&x, &dt, ch);
    let mut momentum = 1.0_f64;
    let mut alpha = 0.5_f64;
    let mut grad = alloc::vec![0.0; m + 1];
    let mut scale = alloc::vec![0.0; m + 1];
    let mut next = alloc::vec![0.0; m + 1];

    for _ in 0..MAX_ITERATIONS {
        gradient(&z, &mut grad, &mut scale);
        for k in 1..m {
            next[k] = z[k] - alpha * grad[k] / scale[k];
        }
        project(&mut next);

        // stationarity: length of the unit scaled projected step at `next`
        gradient(&next, &mut grad, &mut scale);
        let residual = (1..m)
            .map(|k| ((next[k] - grad[k] / scale[k]).clamp(lo[k], hi[k]) - next[k]).abs())
            .fold(0.0, f64::max);
        if residual <= stop {
            return Ok(OffloadSchedule::from_cumulative(
                tunnel.times.clone(),
                &next,
            ));
        }

        let e_next = energy(&next, &dt, ch);
        if e_next > e_x + 1e-12 * e_x.abs() {
            // overshoot: shorten the step and drop the momentum
            alpha = (alpha * 0.5).max(1e-6);
            momentum = 1.0;
            z.copy_from_slice(&x);
            continue;
        }
        // restart when the step opposes the gradient at the new point
        let uphill: f64 = (1..m).map(|k| grad[k] * (next[k] - x[k])).sum();
        if uphill > 0.0 {
            momentum = 1.0;
            z.copy_from_slice(&next);
        } else {
            let t = 0.5 * (1.0 + libm::sqrt(1.0 + 4.0 * momentum * momentum));
            let beta = (momentum - 1.0) / t;
            momentum = t;
            for k in 0..=m {
                z[k] = next[k] + beta * (next[k] - x[k]);
            }
            project(&mut z);
        }
        x.copy_from_slice(&next);
        e_x = e_next;
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{CpuIdlingProfile, Epoch};
    use crate::schedule::pull_string;
    use crate::tunnel::{effective_tunnel, full_utilization_tunnel};

    fn ch() -> ChannelParams {
        ChannelParams::new(1e-6, 1e6, 1e-10).unwrap()
    }

    #[test]
    fn single_epoch_is_constant_rate() {
        let p = CpuIdlingProfile::new(&[Epoch::idle(0.1)], 5e9, 500.0, 0.1).unwrap();
        let t = effective_tunnel(&p, 4e5).unwrap();
        let s = convex_oracle(&t, &ch()).unwrap();
        let want = ch().energy(4e5, 0.1);
        assert!((s.energy(&ch()) - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn zero_buffer_gives_floor() {
        let p = CpuIdlingProfile::new(
            &[Epoch::idle(0.05), Epoch::busy(0.03), Epoch::idle(0.02)],
            5e9,
            500.0,
            0.1,
        )
        .unwrap();
        let t = full_utilization_tunnel(&p, 7e5, 0.0).unwrap();
        let s = convex_oracle(&t, &ch()).unwrap();
        assert_eq!(s.cumulative(), t.floor);
    }

    #[test]
    fn agrees_with_string_on_worked_instance() {
        let p = CpuIdlingProfile::new(
            &[Epoch::idle(0.05), Epoch::busy(0.03), Epoch::idle(0.02)],
            5e9,
            500.0,
            0.1,
        )
        .unwrap();
        for q in [1e9, 1e5, 2e4] {
            let t = full_utilization_tunnel(&p, 7e5, q).unwrap();
            let a = pull_string(&t).unwrap().energy(&ch());
            let b = convex_oracle(&t, &ch()).unwrap().energy(&ch());
            assert!((a - b).abs() <= 1e-6 * a, "q={q}: {a} vs {b}");
        }
    }
}
