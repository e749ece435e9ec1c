//! Monte Carlo sweeps over helper CPU processes, channel draws and arrivals.
//!
//! Every trial gets its own random streams derived from the master seed and
//! the trial index only, so all grid points see the same underlying draws
//! and results do not depend on how trials are spread over threads.

use std::fmt::Write;

use cocompute_core::{
    bursty_schedule, optimize_partition, optimize_theta, plan_offload, sample_arrivals,
    sample_cpu_process, simulate_buffer, verify_local_schedule, BurstyProblem, CpuIdlingProfile,
    Error, OffloadPolicy, OneShotProblem, PartitionOptions, PartitionResult,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::SimConfig;

const STREAM_CPU: u64 = 1;
const STREAM_CHANNEL: u64 = 2;
const STREAM_ARRIVALS: u64 = 3;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of random stream `stream` for trial `trial`.
pub fn trial_seed(master: u64, trial: u64, stream: u64) -> u64 {
    splitmix(splitmix(master ^ splitmix(trial)) ^ stream)
}

fn rng(master: u64, trial: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(master, trial, stream))
}

pub fn policy_label(p: OffloadPolicy) -> &'static str {
    match p {
        OffloadPolicy::Optimal => "optimal",
        OffloadPolicy::Proportional => "proportional",
        OffloadPolicy::LazyFirst => "lazy-first",
        OffloadPolicy::Benchmark => "benchmark",
    }
}

/// Result of one policy on one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub policy: OffloadPolicy,
    /// `None` when local computing and offloading together cannot meet the deadline.
    pub result: Option<PartitionResult>,
    /// The chosen schedule replayed against the helper and the local CPU
    /// without a missed deadline or buffer overflow.
    pub replay_ok: bool,
}

/// Wilson score interval for `k` successes in `n` trials at 95 %.
pub fn wilson(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let (n, p) = (n as f64, k as f64 / n as f64);
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Grid coordinates of a row; unused ones stay `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GridPoint {
    pub idle_mean_s: Option<f64>,
    pub load_bits: Option<f64>,
    pub buffer_bits: Option<f64>,
    pub interarrival_s: Option<f64>,
    pub arrival_size_bits: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub experiment: &'static str,
    pub point: GridPoint,
    pub policy: OffloadPolicy,
    pub trials: usize,
    pub feasible: usize,
    pub probability: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Means over feasible trials.
    pub energy_mean: f64,
    pub energy_se: f64,
    pub local_mean: f64,
    pub transmit_mean: f64,
    pub offload_mean: f64,
    pub replay_failures: usize,
}

fn aggregate(
    experiment: &'static str,
    point: GridPoint,
    policy: OffloadPolicy,
    outcomes: &[TrialOutcome],
) -> Row {
    let results: Vec<&PartitionResult> = outcomes
        .iter()
        .filter(|o| o.policy == policy)
        .filter_map(|o| o.result.as_ref())
        .collect();
    let trials = outcomes.iter().filter(|o| o.policy == policy).count();
    let feasible = results.len();
    let n = feasible as f64;
    let mean = |f: fn(&PartitionResult) -> f64| {
        if feasible == 0 {
            f64::NAN
        } else {
            results.iter().map(|r| f(r)).sum::<f64>() / n
        }
    };
    let energy_mean = mean(|r| r.total_energy);
    let energy_se = if feasible > 1 {
        let var = results
            .iter()
            .map(|r| (r.total_energy - energy_mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        (var / n).sqrt()
    } else {
        f64::NAN
    };
    let (ci_low, ci_high) = wilson(feasible, trials);
    Row {
        experiment,
        point,
        policy,
        trials,
        feasible,
        probability: feasible as f64 / trials as f64,
        ci_low,
        ci_high,
        energy_mean,
        energy_se,
        local_mean: mean(|r| r.local_energy),
        transmit_mean: mean(|r| r.transmit_energy),
        offload_mean: mean(|r| r.offload_bits),
        replay_failures: outcomes
            .iter()
            .filter(|o| o.policy == policy && !o.replay_ok)
            .count(),
    }
}

/// Rows of one experiment plus summary notes written as `#` comment lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub rows: Vec<Row>,
    pub notes: Vec<(String, String)>,
}

fn num(x: f64) -> String {
    format!("{x:.11e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "experiment,idle_mean_s,load_bits,buffer_bits,interarrival_s,arrival_size_bits,policy,trials,feasible,\
             probability,prob_ci_low,prob_ci_high,energy_mean_j,energy_se_j,local_mean_j,transmit_mean_j,\
             offload_mean_bits,replay_failures\n",
        );
        for r in &self.rows {
            let p = &r.point;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.experiment,
                opt(p.idle_mean_s),
                opt(p.load_bits),
                opt(p.buffer_bits),
                opt(p.interarrival_s),
                opt(p.arrival_size_bits),
                policy_label(r.policy),
                r.trials,
                r.feasible,
                num(r.probability),
                num(r.ci_low),
                num(r.ci_high),
                num(r.energy_mean),
                num(r.energy_se),
                num(r.local_mean),
                num(r.transmit_mean),
                num(r.offload_mean),
                r.replay_failures,
            )
            .unwrap();
        }
        for (k, v) in &self.notes {
            writeln!(out, "# {k},{v}").unwrap();
        }
        out
    }

    /// Rows of one policy in grid order.
    pub fn policy_rows(&self, policy: OffloadPolicy) -> Vec<&Row> {
        self.rows.iter().filter(|r| r.policy == policy).collect()
    }
}

fn sample_profile(cfg: &SimConfig, trial: u64, mean_idle: f64) -> Result<CpuIdlingProfile, Error> {
    let mut r = rng(cfg.seed, trial, STREAM_CPU);
    let epochs = sample_cpu_process(
        &mut r,
        cfg.deadline_s,
        mean_idle,
        cfg.mean_busy_s,
        cfg.initial_state.into(),
    )?;
    CpuIdlingProfile::new(
        &epochs,
        cfg.helper_freq_hz,
        cfg.cycles_per_bit,
        cfg.deadline_s,
    )
}

fn sample_gain(cfg: &SimConfig, trial: u64) -> f64 {
    let mean = cfg.path_gain();
    if cfg.rayleigh_fading {
        let u: f64 = rng(cfg.seed, trial, STREAM_CHANNEL).gen();
        // keep the gain strictly positive
        (-mean * (1.0 - u).ln()).max(mean * 1e-12)
    } else {
        mean
    }
}

fn oneshot_trial(
    cfg: &SimConfig,
    trial: u64,
    mean_idle: f64,
    load: f64,
    buffer: f64,
    policies: &[OffloadPolicy],
) -> Result<Vec<TrialOutcome>, Error> {
    let profile = sample_profile(cfg, trial, mean_idle)?;
    let channel = cfg.channel(sample_gain(cfg, trial))?;
    let problem = OneShotProblem {
        bits: load,
        horizon: cfg.deadline_s,
        buffer,
        channel,
        local: cfg.local()?,
    };
    policies
        .iter()
        .map(|&policy| {
            match optimize_partition(
                &problem,
                &profile,
                PartitionOptions {
                    policy,
                    shortcut: true,
                },
            ) {
                Ok(r) => {
                    let plan = plan_offload(&profile, r.offload_bits, buffer, &channel, policy)?;
                    let q = if policy == OffloadPolicy::Benchmark {
                        0.0
                    } else {
                        buffer
                    };
                    let trace = simulate_buffer(&plan.schedule, &plan.profile, q);
                    let local_ok = load - r.offload_bits
                        <= problem.local.rate() * cfg.deadline_s * (1.0 + 1e-9) + 1e-6;
                    Ok(TrialOutcome {
                        policy,
                        result: Some(r),
                        replay_ok: trace.deadline_met && !trace.overflow && local_ok,
                    })
                }
                Err(Error::InfeasiblePartition { .. }) => Ok(TrialOutcome {
                    policy,
                    result: None,
                    replay_ok: true,
                }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

fn bursty_trial(
    cfg: &SimConfig,
    trial: u64,
    interarrival: f64,
    mean_size: f64,
    policies: &[OffloadPolicy],
) -> Result<Vec<TrialOutcome>, Error> {
    let profile = sample_profile(cfg, trial, cfg.mean_idle_s)?;
    let channel = cfg.channel(sample_gain(cfg, trial))?;
    let base_mean = 0.5 * (cfg.arrival_size_low_bits + cfg.arrival_size_high_bits);
    let scale = mean_size / base_mean;
    let mut r = rng(cfg.seed, trial, STREAM_ARRIVALS);
    let arrivals = sample_arrivals(
        &mut r,
        cfg.deadline_s,
        interarrival,
        cfg.arrival_size_low_bits * scale,
        cfg.arrival_size_high_bits * scale,
    )?;
    let local = cfg.local()?;
    let problem = BurstyProblem {
        arrivals,
        horizon: cfg.deadline_s,
        channel,
        local,
    };
    policies
        .iter()
        .map(|&policy| {
            match optimize_theta(
                &problem,
                &profile,
                PartitionOptions {
                    policy,
                    shortcut: true,
                },
            ) {
                Ok(res) => {
                    let (_, schedule) =
                        bursty_schedule(&profile, &problem.arrivals, res.ratio, policy)?;
                    let trace = simulate_buffer(&schedule, &profile, f64::INFINITY);
                    let local_trace =
                        verify_local_schedule(&problem.arrivals, res.ratio, &local, cfg.deadline_s);
                    Ok(TrialOutcome {
                        policy,
                        result: Some(res),
                        replay_ok: trace.deadline_met && local_trace.complete(),
                    })
                }
                Err(Error::InfeasibleRatio { .. }) => Ok(TrialOutcome {
                    policy,
                    result: None,
                    replay_ok: true,
                }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

fn run_trials<F>(cfg: &SimConfig, f: F) -> Result<Vec<TrialOutcome>, Error>
where
    F: Fn(u64) -> Result<Vec<TrialOutcome>, Error> + Sync + Send,
{
    let per_trial: Vec<Vec<TrialOutcome>> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(f)
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}

/// Computing probability and energy versus the expected idle epoch length,
/// for every load in the grid.
pub fn run_oneshot_sweep(cfg: &SimConfig, policies: &[OffloadPolicy]) -> Result<Table, Error> {
    let mut table = Table::default();
    for &load in &cfg.sweep.loads_bits {
        for &idle in &cfg.sweep.idle_means_s {
            let outcomes = run_trials(cfg, |t| {
                oneshot_trial(cfg, t, idle, load, cfg.buffer_bits, policies)
            })?;
            let point = GridPoint {
                idle_mean_s: Some(idle),
                load_bits: Some(load),
                buffer_bits: Some(cfg.buffer_bits),
                ..Default::default()
            };
            for &p in policies {
                table.rows.push(aggregate("oneshot", point, p, &outcomes));
            }
        }
    }
    Ok(table)
}

/// Smallest grid buffer from which lazy-first uses less energy than
/// proportional utilization, given that proportional wins at the smallest
/// buffer.
pub fn crossover(table: &Table) -> Option<f64> {
    let prop = table.policy_rows(OffloadPolicy::Proportional);
    let lazy = table.policy_rows(OffloadPolicy::LazyFirst);
    let pairs: Vec<(f64, f64, f64)> = prop
        .iter()
        .zip(&lazy)
        .map(|(p, l)| {
            (
                p.point.buffer_bits.unwrap_or(0.0),
                p.energy_mean,
                l.energy_mean,
            )
        })
        .collect();
    let first = pairs.first()?;
    if !(first.1 < first.2) {
        return None;
    }
    pairs.iter().find(|(_, p, l)| l < p).map(|(q, _, _)| *q)
}

/// Energy versus helper buffer size at the configured load.
pub fn run_buffer_sweep(cfg: &SimConfig, policies: &[OffloadPolicy]) -> Result<Table, Error> {
    let mut buffers = cfg.sweep.buffers_bits.clone();
    buffers.sort_by(f64::total_cmp);
    let mut table = Table::default();
    for &q in &buffers {
        let outcomes = run_trials(cfg, |t| {
            oneshot_trial(cfg, t, cfg.mean_idle_s, cfg.load_bits, q, policies)
        })?;
        let point = GridPoint {
            idle_mean_s: Some(cfg.mean_idle_s),
            load_bits: Some(cfg.load_bits),
            buffer_bits: Some(q),
            ..Default::default()
        };
        for &p in policies {
            table.rows.push(aggregate("buffer", point, p, &outcomes));
        }
    }
    let note = crossover(&table).map(num).unwrap_or_else(|| "none".into());
    table.notes.push(("crossover_buffer_bits".into(), note));
    Ok(table)
}

/// Computing probability and energy versus expected arrival size, for every
/// inter-arrival mean in the grid.
pub fn run_bursty_sweep(cfg: &SimConfig, policies: &[OffloadPolicy]) -> Result<Table, Error> {
    let mut table = Table::default();
    for &ia in &cfg.sweep.interarrival_means_s {
        for &size in &cfg.sweep.arrival_sizes_bits {
            let outcomes = run_trials(cfg, |t| bursty_trial(cfg, t, ia, size, policies))?;
            let point = GridPoint {
                idle_mean_s: Some(cfg.mean_idle_s),
                interarrival_s: Some(ia),
                arrival_size_bits: Some(size),
                ..Default::default()
            };
            for &p in policies {
                table.rows.push(aggregate("bursty", point, p, &outcomes));
            }
        }
    }
    Ok(table)
}
