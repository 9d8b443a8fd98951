//! JSON run configuration.
//!
//! A config file is either a bare parameter object
//! (`{"a1_mhz": .., "a2_mhz": .., ...}`) or a full run description:
//!
//! ```json
//! {
//!   "params": {"a1_mhz": 0.81, "a2_mhz": -0.86, "j12_mhz": 0.38,
//!              "omega1_mhz": 0.14, "omega2_mhz": 0.0, "b0_gauss": 694},
//!   "protocol": "sedor",
//!   "sweep": {"start": 0.0, "stop": 20.0, "n_points": 512},
//!   "options": {"tppi_nu": 1.25, "noise_sigma": 0.02, "seed": 7}
//! }
//! ```

use std::fs;
use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use spinlab::analysis::Window;
use spinlab::ClusterParams;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Protocol {
    NvEsr,
    DeerEsr,
    Sedor,
    HartmannHahn,
    PolarizationTransfer,
    DeerRabi,
}

impl Protocol {
    /// Sweep used when neither the config nor the command line gives one.
    pub fn default_sweep(self) -> Sweep {
        let (start, stop, n_points) = match self {
            Self::NvEsr => (-3.0, 3.0, 121),
            Self::DeerEsr => (-20.0, 20.0, 161),
            Self::Sedor | Self::PolarizationTransfer => (0.0, 20.0, 512),
            Self::HartmannHahn => (0.0, 10.0, 201),
            Self::DeerRabi => (0.0, spinlab::experiments::DEER_RABI_TAU, 256),
        };
        Sweep { start, stop, n_points }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub n_points: usize,
}

impl Sweep {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.n_points < 2 {
            return Err(CliError::usage(format!("sweep needs n_points ≥ 2, got {}", self.n_points)));
        }
        if !self.start.is_finite() || !self.stop.is_finite() || !(self.start < self.stop) {
            return Err(CliError::usage(format!("sweep needs start < stop, got {} .. {}", self.start, self.stop)));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        spinlab::linspace(self.start, self.stop, self.n_points)
    }
}

/// Protocol options. Each protocol reads the fields that apply to it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// TPPI rate, MHz (sedor, polarization_transfer).
    pub tppi_nu: Option<f64>,
    /// Dark-spin Rabi frequency, MHz (deer_esr, deer_rabi, finite-pulse sedor).
    pub ds_rabi: Option<f64>,
    /// Echo time, µs (deer_esr).
    pub tau: Option<f64>,
    /// Decay envelope `exp(−(τ/t2)^p)` (sedor).
    pub t2: Option<f64>,
    pub p: Option<f64>,
    /// Spin-lock Rabi frequency and extra DS detuning, MHz (hartmann_hahn, polarization_transfer).
    pub hh_rabi: Option<f64>,
    pub hh_detuning: Option<f64>,
    /// Phase of the first NV π/2, rad (hartmann_hahn, polarization_transfer).
    pub nv_phase: Option<f64>,
    /// Spin-lock duration, µs (polarization_transfer).
    pub spinlock_t: Option<f64>,
    /// NV ESR probe Rabi frequency, MHz.
    pub probe_rabi: Option<f64>,
    pub noise_sigma: Option<f64>,
    pub seed: Option<u64>,
    /// FFT settings (polarization_transfer).
    pub zero_pad_factor: Option<usize>,
    pub window: Option<Window>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ClusterParams,
    #[serde(default)]
    pub protocol: Option<Protocol>,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub options: Options,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::usage(format!("config: {e}")))?;
        let config = if value.get("params").is_some() {
            serde_json::from_value(value).map_err(|e| CliError::usage(format!("config: {e}")))?
        } else {
            let params: ClusterParams =
                serde_json::from_value(value).map_err(|e| CliError::usage(format!("config parameters: {e}")))?;
            RunConfig { params, protocol: None, sweep: None, options: Options::default() }
        };
        config.params.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_params_and_full_config() {
        let bare = r#"{"a1_mhz":0.81,"a2_mhz":-0.86,"j12_mhz":0.38,"omega1_mhz":0.14,"omega2_mhz":0,"b0_gauss":694}"#;
        let c = RunConfig::from_json(bare).unwrap();
        assert_eq!(c.params, ClusterParams::REFERENCE);
        assert_eq!(c.protocol, None);

        let full = format!(
            r#"{{"params":{bare},"protocol":"deer_esr","sweep":{{"start":-5,"stop":5,"n_points":11}},"options":{{"tau":3.0,"window":"hann"}}}}"#
        );
        let c = RunConfig::from_json(&full).unwrap();
        assert_eq!(c.protocol, Some(Protocol::DeerEsr));
        assert_eq!(c.options.window, Some(Window::Hann));
        assert_eq!(c.sweep.unwrap().grid().len(), 11);
    }

    #[test]
    fn rejects_typos_and_bad_values() {
        assert!(RunConfig::from_json("{}").is_err());
        assert!(RunConfig::from_json("not json").is_err());
        let typo = r#"{"params":{"a1_mhz":0.8,"a2_mhz":0,"j12_mhz":0,"omega1_mhz":0,"omega2_mhz":0,"b0_gauss":1},"optoins":{}}"#;
        assert!(RunConfig::from_json(typo).is_err());
        assert!(Sweep { start: 1.0, stop: 1.0, n_points: 5 }.validate().is_err());
        assert!(Sweep { start: 0.0, stop: 1.0, n_points: 1 }.validate().is_err());
    }
}
