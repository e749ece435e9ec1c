//! Line-oriented text formats for profiles, arrivals, tunnels and schedules.
//!
//! One comma-separated record per line. Blank lines and lines starting with
//! `#` are ignored, as is a header line whose first field is not a number.

use std::fmt::Write;

use cocompute_core::{Arrival, CpuState, Epoch, FeasibilityTunnel, OffloadSchedule};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i, l.split(',').map(str::trim).collect::<Vec<_>>()))
        .enumerate()
        .filter(|(n, (_, fields))| !(*n == 0 && fields[0].parse::<f64>().is_err()))
        .map(|(_, r)| r)
}

fn number(line: usize, field: &str, what: &str) -> Result<f64, FormatError> {
    field.parse::<f64>().map_err(|_| FormatError {
        line,
        message: format!("bad {what} `{field}`"),
    })
}

fn expect_fields(line: usize, fields: &[&str], n: usize) -> Result<(), FormatError> {
    if fields.len() == n {
        Ok(())
    } else {
        Err(FormatError {
            line,
            message: format!("expected {n} fields, found {}", fields.len()),
        })
    }
}

/// `duration_s,state` with state `idle`/`busy` (or `1`/`0`).
pub fn parse_profile(text: &str) -> Result<Vec<Epoch>, FormatError> {
    records(text)
        .map(|(line, f)| {
            expect_fields(line, &f, 2)?;
            let duration = number(line, f[0], "duration")?;
            let state = match f[1].to_ascii_lowercase().as_str() {
                "idle" | "1" => CpuState::Idle,
                "busy" | "0" => CpuState::Busy,
                other => {
                    return Err(FormatError {
                        line,
                        message: format!("bad state `{other}`"),
                    })
                }
            };
            Ok(Epoch { duration, state })
        })
        .collect()
}

pub fn write_profile(epochs: &[Epoch]) -> String {
    let mut out = String::from("duration_s,state\n");
    for e in epochs {
        let state = if e.state.is_idle() { "idle" } else { "busy" };
        writeln!(out, "{:.11e},{state}", e.duration).unwrap();
    }
    out
}

/// `time_s,size_bits`.
pub fn parse_arrivals(text: &str) -> Result<Vec<Arrival>, FormatError> {
    records(text)
        .map(|(line, f)| {
            expect_fields(line, &f, 2)?;
            Ok(Arrival {
                time: number(line, f[0], "time")?,
                size: number(line, f[1], "size")?,
            })
        })
        .collect()
}

pub fn write_arrivals(arrivals: &[Arrival]) -> String {
    let mut out = String::from("time_s,size_bits\n");
    for a in arrivals {
        writeln!(out, "{:.11e},{:.11e}", a.time, a.size).unwrap();
    }
    out
}

/// `time_s,floor_bits,ceiling_bits`, one row per boundary.
pub fn write_tunnel(t: &FeasibilityTunnel) -> String {
    let mut out = String::from("time_s,floor_bits,ceiling_bits\n");
    for k in 0..t.times.len() {
        writeln!(
            out,
            "{:.11e},{:.11e},{:.11e}",
            t.times[k], t.floor[k], t.ceiling[k]
        )
        .unwrap();
    }
    out
}

/// `time_s,cumulative_bits,rate_bps`, one row per boundary; the rate is the
/// one used from that boundary on (zero at the last boundary).
pub fn write_schedule(s: &OffloadSchedule) -> String {
    let mut out = String::from("time_s,cumulative_bits,rate_bps\n");
    let cum = s.cumulative();
    let rates = s.rates();
    for k in 0..s.times.len() {
        let r = rates.get(k).copied().unwrap_or(0.0);
        writeln!(out, "{:.11e},{:.11e},{:.11e}", s.times[k], cum[k], r).unwrap();
    }
    out
}
