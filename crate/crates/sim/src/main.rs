use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cocompute_core::{
    optimize_partition, plan_offload, ArrivalProcess, CpuIdlingProfile, Error, OffloadPolicy,
    OneShotProblem, PartitionOptions,
};
use cocompute_sim::config::SimConfig;
use cocompute_sim::experiment::{run_buffer_sweep, run_bursty_sweep, run_oneshot_sweep, Table};
use cocompute_sim::format::{parse_arrivals, parse_profile, write_schedule, write_tunnel};

#[derive(Parser)]
#[command(
    name = "cocompute",
    version,
    about = "Energy-efficient offloading to a peer helper with random idle time"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Computing probability and energy versus expected idle epoch length
    Oneshot(SweepArgs),
    /// Energy versus helper buffer size
    Buffer(SweepArgs),
    /// Computing probability and energy for bursty arrivals
    Bursty(SweepArgs),
    /// Optimal offloading schedule for a given helper profile
    Solve(SolveArgs),
    /// Feasibility tunnel for a given helper profile
    Tunnel(TunnelArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Optimal,
    Proportional,
    LazyFirst,
    Benchmark,
}

impl From<PolicyArg> for OffloadPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Optimal => OffloadPolicy::Optimal,
            PolicyArg::Proportional => OffloadPolicy::Proportional,
            PolicyArg::LazyFirst => OffloadPolicy::LazyFirst,
            PolicyArg::Benchmark => OffloadPolicy::Benchmark,
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "configs/default.json")]
    config: PathBuf,
    /// Overrides the configured master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured number of trials per grid point
    #[arg(long)]
    trials: Option<usize>,
    /// CSV output path; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run only these policies
    #[arg(long, value_enum, value_delimiter = ',')]
    policy: Vec<PolicyArg>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, default_value = "configs/default.json")]
    config: PathBuf,
    /// Helper profile, one `duration_s,state` record per epoch
    #[arg(long)]
    profile: PathBuf,
    /// Offloaded bits; chosen by partition optimization when absent
    #[arg(long)]
    offload: Option<f64>,
    /// Overrides the configured helper buffer
    #[arg(long)]
    buffer: Option<f64>,
    /// Channel power gain; the configured mean path gain when absent
    #[arg(long)]
    h_sq: Option<f64>,
    #[arg(long, value_enum, default_value = "optimal")]
    policy: PolicyArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TunnelArgs {
    #[arg(long, default_value = "configs/default.json")]
    config: PathBuf,
    #[arg(long)]
    profile: PathBuf,
    /// Offloaded bits for a one-shot tunnel
    #[arg(long, required_unless_present = "arrivals")]
    offload: Option<f64>,
    #[arg(long)]
    buffer: Option<f64>,
    /// Arrival file, one `time_s,size_bits` record per event
    #[arg(long, requires = "theta", conflicts_with = "offload")]
    arrivals: Option<PathBuf>,
    /// Offloaded fraction of every arrival
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_profile(cfg: &SimConfig, path: &Path) -> Result<CpuIdlingProfile> {
    let epochs = parse_profile(&read(path)?).with_context(|| path.display().to_string())?;
    let horizon = epochs.iter().map(|e| e.duration).sum();
    Ok(CpuIdlingProfile::new(
        &epochs,
        cfg.helper_freq_hz,
        cfg.cycles_per_bit,
        horizon,
    )?)
}

fn sweep(
    args: &SweepArgs,
    run: fn(&SimConfig, &[OffloadPolicy]) -> Result<Table, Error>,
    default: &[OffloadPolicy],
) -> Result<()> {
    let mut cfg = SimConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
        cfg.validate()?;
    }
    let policies: Vec<OffloadPolicy> = if args.policy.is_empty() {
        default.to_vec()
    } else {
        args.policy.iter().map(|&p| p.into()).collect()
    };
    let table = run(&cfg, &policies)?;
    emit(args.out.as_deref(), &table.to_csv())
}

fn solve(args: &SolveArgs) -> Result<()> {
    let cfg = SimConfig::load(&args.config)?;
    let profile = load_profile(&cfg, &args.profile)?;
    let buffer = args.buffer.unwrap_or(cfg.buffer_bits);
    let channel = cfg.channel(args.h_sq.unwrap_or_else(|| cfg.path_gain()))?;
    let policy = args.policy.into();
    let offload = match args.offload {
        Some(bits) => bits,
        None => {
            let problem = OneShotProblem {
                bits: cfg.load_bits,
                horizon: profile.horizon(),
                buffer,
                channel,
                local: cfg.local()?,
            };
            let r = optimize_partition(
                &problem,
                &profile,
                PartitionOptions {
                    policy,
                    shortcut: true,
                },
            )?;
            eprintln!(
                "offload_bits={:.11e} local_energy_j={:.11e} transmit_energy_j={:.11e}",
                r.offload_bits, r.local_energy, r.transmit_energy
            );
            r.offload_bits
        }
    };
    let plan = plan_offload(&profile, offload, buffer, &channel, policy)?;
    eprintln!("transmit_energy_j={:.11e}", plan.energy);
    emit(args.out.as_deref(), &write_schedule(&plan.schedule))
}

fn tunnel(args: &TunnelArgs) -> Result<()> {
    let cfg = SimConfig::load(&args.config)?;
    let profile = load_profile(&cfg, &args.profile)?;
    let t = match (&args.arrivals, args.offload) {
        (Some(path), _) => {
            let events =
                parse_arrivals(&read(path)?).with_context(|| path.display().to_string())?;
            let arrivals = ArrivalProcess::new(&events, profile.horizon())?;
            cocompute_core::tunnel::bursty_tunnel(&profile, &arrivals, args.theta.unwrap_or(0.0))?
        }
        (None, Some(bits)) => {
            let channel = cfg.channel(cfg.path_gain())?;
            let buffer = args.buffer.unwrap_or(cfg.buffer_bits);
            plan_offload(&profile, bits, buffer, &channel, OffloadPolicy::Optimal)?.tunnel
        }
        (None, None) => anyhow::bail!("either --offload or --arrivals is required"),
    };
    if !t.is_feasible() {
        eprintln!("warning: the tunnel floor rises above its ceiling");
    }
    emit(args.out.as_deref(), &write_tunnel(&t))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<Error>() {
        return match e {
            Error::InfeasibleTunnel
            | Error::InfeasiblePartition { .. }
            | Error::InfeasibleRatio { .. }
            | Error::ExceedsCapacity { .. }
            | Error::NotFullUtilization { .. } => 2,
            Error::NoConvergence { .. } => 3,
            _ => 1,
        };
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let both = [OffloadPolicy::Optimal, OffloadPolicy::Benchmark];
    let result = match &cli.command {
        Command::Oneshot(a) => sweep(a, run_oneshot_sweep, &both),
        Command::Buffer(a) => sweep(
            a,
            run_buffer_sweep,
            &[OffloadPolicy::Proportional, OffloadPolicy::LazyFirst],
        ),
        Command::Bursty(a) => sweep(a, run_bursty_sweep, &both),
        Command::Solve(a) => solve(a),
        Command::Tunnel(a) => tunnel(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
