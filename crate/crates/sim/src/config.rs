//! JSON experiment configuration.

use std::path::Path;

use cocompute_core::{ChannelParams, InitialState, LocalComputeParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid value for `{field}`: {value}")]
    Invalid { field: &'static str, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartState {
    #[default]
    Random,
    Idle,
    Busy,
}

impl From<StartState> for InitialState {
    fn from(s: StartState) -> Self {
        match s {
            StartState::Random => InitialState::Random,
            StartState::Idle => InitialState::Idle,
            StartState::Busy => InitialState::Busy,
        }
    }
}

/// Grid values swept by the experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Expected idle epoch lengths for the one-shot sweep, s.
    pub idle_means_s: Vec<f64>,
    /// Computation loads for the one-shot sweep, bits.
    pub loads_bits: Vec<f64>,
    /// Helper buffer sizes for the buffer sweep, bits.
    pub buffers_bits: Vec<f64>,
    /// Expected data arrival sizes for the bursty sweep, bits.
    pub arrival_sizes_bits: Vec<f64>,
    /// Expected inter-arrival times for the bursty sweep, s.
    pub interarrival_means_s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub deadline_s: f64,
    pub user_freq_hz: f64,
    pub cycles_per_bit: f64,
    pub gamma: f64,
    pub helper_freq_hz: f64,
    pub buffer_bits: f64,
    pub bandwidth_hz: f64,
    pub noise_dbm: f64,
    pub path_loss_db: f64,
    /// Draw `h^2` per trial from an exponential law with the path-loss mean.
    pub rayleigh_fading: bool,
    pub mean_idle_s: f64,
    pub mean_busy_s: f64,
    #[serde(default)]
    pub initial_state: StartState,
    pub load_bits: f64,
    /// Arrival size range; the bursty sweep rescales it to each grid mean.
    pub arrival_size_low_bits: f64,
    pub arrival_size_high_bits: f64,
    pub trials: usize,
    pub seed: u64,
    pub sweep: SweepConfig,
}

fn positive(field: &'static str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::Invalid {
            field,
            value: v.to_string(),
        })
    }
}

fn non_negative(field: &'static str, v: f64) -> Result<(), ConfigError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::Invalid {
            field,
            value: v.to_string(),
        })
    }
}

fn grid(field: &'static str, values: &[f64], allow_zero: bool) -> Result<(), ConfigError> {
    if values.is_empty() {
        return Err(ConfigError::Invalid {
            field,
            value: "empty grid".into(),
        });
    }
    for &v in values {
        if allow_zero {
            non_negative(field, v)?
        } else {
            positive(field, v)?
        }
    }
    Ok(())
}

impl SimConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: SimConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("deadline_s", self.deadline_s)?;
        positive("user_freq_hz", self.user_freq_hz)?;
        positive("cycles_per_bit", self.cycles_per_bit)?;
        positive("gamma", self.gamma)?;
        positive("helper_freq_hz", self.helper_freq_hz)?;
        non_negative("buffer_bits", self.buffer_bits)?;
        positive("bandwidth_hz", self.bandwidth_hz)?;
        if !self.noise_dbm.is_finite() {
            return Err(ConfigError::Invalid {
                field: "noise_dbm",
                value: self.noise_dbm.to_string(),
            });
        }
        if !self.path_loss_db.is_finite() {
            return Err(ConfigError::Invalid {
                field: "path_loss_db",
                value: self.path_loss_db.to_string(),
            });
        }
        positive("mean_idle_s", self.mean_idle_s)?;
        positive("mean_busy_s", self.mean_busy_s)?;
        non_negative("load_bits", self.load_bits)?;
        non_negative("arrival_size_low_bits", self.arrival_size_low_bits)?;
        positive("arrival_size_high_bits", self.arrival_size_high_bits)?;
        if self.arrival_size_high_bits < self.arrival_size_low_bits {
            return Err(ConfigError::Invalid {
                field: "arrival_size_high_bits",
                value: format!(
                    "{} is below arrival_size_low_bits",
                    self.arrival_size_high_bits
                ),
            });
        }
        if self.trials == 0 {
            return Err(ConfigError::Invalid {
                field: "trials",
                value: "0".into(),
            });
        }
        let s = &self.sweep;
        grid("sweep.idle_means_s", &s.idle_means_s, false)?;
        grid("sweep.loads_bits", &s.loads_bits, true)?;
        grid("sweep.buffers_bits", &s.buffers_bits, true)?;
        grid("sweep.arrival_sizes_bits", &s.arrival_sizes_bits, false)?;
        grid("sweep.interarrival_means_s", &s.interarrival_means_s, false)?;
        Ok(())
    }

    /// Noise power in W.
    pub fn noise_w(&self) -> f64 {
        10f64.powf((self.noise_dbm - 30.0) / 10.0)
    }

    /// Mean channel power gain.
    pub fn path_gain(&self) -> f64 {
        10f64.powf(-self.path_loss_db / 10.0)
    }

    pub fn channel(&self, h_sq: f64) -> cocompute_core::Result<ChannelParams> {
        ChannelParams::new(h_sq, self.bandwidth_hz, self.noise_w())
    }

    pub fn local(&self) -> cocompute_core::Result<LocalComputeParams> {
        LocalComputeParams::new(self.user_freq_hz, self.cycles_per_bit, self.gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = include_str!("../../../configs/default.json");

    #[test]
    fn bundled_config_parses() {
        let cfg = SimConfig::from_json(SAMPLE).unwrap();
        assert!((cfg.noise_w() - 1e-10).abs() < 1e-22);
        assert!((cfg.path_gain() - 1e-6).abs() < 1e-18);
        assert!((cfg.local().unwrap().p_cyc() - 1e-10).abs() < 1e-22);
    }

    #[test]
    fn missing_field_is_named() {
        let mut v: serde_json::Value = serde_json::from_str(SAMPLE).unwrap();
        v.as_object_mut().unwrap().remove("bandwidth_hz");
        let err = SimConfig::from_json(&v.to_string())
            .unwrap_err()
            .to_string();
        assert!(err.contains("bandwidth_hz"), "{err}");
    }

    #[test]
    fn bad_values_are_named() {
        let mut v: serde_json::Value = serde_json::from_str(SAMPLE).unwrap();
        v["trials"] = 0.into();
        let err = SimConfig::from_json(&v.to_string())
            .unwrap_err()
            .to_string();
        assert!(err.contains("trials"), "{err}");
        let mut v: serde_json::Value = serde_json::from_str(SAMPLE).unwrap();
        v["sweep"]["idle_means_s"] = serde_json::json!([0.01, -1.0]);
        let err = SimConfig::from_json(&v.to_string())
            .unwrap_err()
            .to_string();
        assert!(err.contains("idle_means_s"), "{err}");
    }
}
