//! Minimum-energy peer-to-peer computation offloading.
//!
//! A user with a computation deadline can split its input data between its
//! own CPU and a nearby helper whose CPU alternates between busy and idle
//! epochs. Given advance knowledge of the helper's idle profile, this crate
//! computes the transmission schedule that feeds the helper with the least
//! radio energy (the shortest path through a feasibility tunnel), and the
//! energy-optimal split of the data between offloading and local computing.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, Monte Carlo
//! experiments and the command line live in `cocompute-sim`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
mod tol;

pub mod arrival;
pub mod energy;
pub mod oracle;
pub mod partition;
pub mod policy;
pub mod profile;
pub mod sample;
pub mod schedule;
pub mod tunnel;

pub use arrival::{merge_events, Arrival, ArrivalProcess, Timeline};
pub use energy::{ChannelParams, LocalComputeParams};
pub use error::{Error, Result};
pub use oracle::convex_oracle;
pub use partition::{
    bursty_schedule, min_offload_shortcut, optimize_partition, optimize_theta, subgradient_e_off,
    verify_local_schedule, BurstyProblem, LocalTrace, OneShotProblem, PartitionOptions,
    PartitionResult,
};
pub use policy::{benchmark_schedule, plan_offload, solve_p1, OffloadPlan, OffloadPolicy};
pub use profile::{CpuIdlingProfile, CpuState, Epoch};
pub use sample::{sample_arrivals, sample_cpu_process, InitialState};
pub use schedule::{
    pull_string, simulate_buffer, verify_optimality, BufferTrace, OffloadSchedule,
    OptimalityReport, Violation,
};
pub use tunnel::FeasibilityTunnel;
