use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::sedor::{run_sedor_with, SedorOptions};
use super::{check_grid, params_json, sweep};
use crate::analysis::{compute_fft, Window};
use crate::error::ExperimentError;
use crate::pulse::{contrast, run_symmetrized, Channel, Drive, Engine, SequenceStep};
use crate::signal::{Signal, Spectrum};
use crate::spin::{ClusterParams, SpinState};

/// Spin-lock settings. The NV lock axis is fixed at `−y`, which the NV
/// occupies after a π/2 of phase 0; `nv_phase = π` starts it anti-aligned and
/// reverses the direction of transfer. The dark spins are driven along x at
/// `rabi + hh_detuning`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HartmannHahn {
    #[serde(rename = "rabi_mhz")]
    pub rabi: f64,
    #[serde(rename = "hh_detuning_mhz", default)]
    pub hh_detuning: f64,
    #[serde(rename = "nv_phase_rad", default)]
    pub nv_phase: f64,
}

impl Default for HartmannHahn {
    fn default() -> Self {
        Self { rabi: 13.0, hh_detuning: 0.0, nv_phase: 0.0 }
    }
}

impl HartmannHahn {
    fn validate(&self) -> Result<(), ExperimentError> {
        if !(self.rabi > 0.0) || !self.rabi.is_finite() {
            return Err(ExperimentError::InvalidArgument(format!("Rabi {} must be > 0", self.rabi)));
        }
        if !(self.rabi + self.hh_detuning >= 0.0) || !self.hh_detuning.is_finite() || !self.nv_phase.is_finite() {
            return Err(ExperimentError::InvalidArgument("invalid Hartmann-Hahn detuning or phase".into()));
        }
        Ok(())
    }

    fn body(&self, t: f64) -> [SequenceStep; 2] {
        [
            SequenceStep::ideal(Channel::NV, self.nv_phase, PI / 2.0),
            SequenceStep::DualDrive {
                nv: Drive { rabi: self.rabi, detuning: 0.0, phase: -PI / 2.0 },
                ds: Drive { rabi: self.rabi + self.hh_detuning, detuning: 0.0, phase: 0.0 },
                duration: t,
            },
        ]
    }
}

/// Spin-locked NV polarization after time `T` on the lock, read out
/// symmetrically along the lock axis. Equals 1 at `T = 0` for `nv_phase = 0`.
pub fn run_hartmann_hahn(
    params: &ClusterParams,
    spinlock_grid: &[f64],
    rabi: f64,
    hh_detuning: f64,
) -> Result<Signal, ExperimentError> {
    run_hartmann_hahn_with(params, spinlock_grid, &HartmannHahn { rabi, hh_detuning, nv_phase: 0.0 })
}

pub fn run_hartmann_hahn_with(
    params: &ClusterParams,
    spinlock_grid: &[f64],
    hh: &HartmannHahn,
) -> Result<Signal, ExperimentError> {
    check_grid(spinlock_grid, "spin-lock")?;
    if spinlock_grid[0] < 0.0 {
        return Err(ExperimentError::InvalidSweep("spin-lock times must be ≥ 0".into()));
    }
    hh.validate()?;
    let initial = SpinState::nv_polarized();
    let values =
        sweep(params, spinlock_grid, |engine, t| contrast(&run_symmetrized(engine, &hh.body(t), 0.0, &initial)?))?;
    let meta = crate::signal::Meta::new("hartmann_hahn")
        .with("rabi_mhz", hh.rabi)
        .with("hh_detuning_mhz", hh.hh_detuning)
        .with("nv_phase_rad", hh.nv_phase)
        .with("params", params_json(params));
    Ok(Signal::new(spinlock_grid.to_vec(), values, meta)?)
}

/// Dark-spin state prepared by a spin lock of length `spinlock_t`, a DS π/2
/// about y that stores the transferred polarization along z, and NV
/// repolarization.
pub fn transferred_state(
    params: &ClusterParams,
    hh: &HartmannHahn,
    spinlock_t: f64,
) -> Result<SpinState, ExperimentError> {
    hh.validate()?;
    if !(spinlock_t >= 0.0) {
        return Err(ExperimentError::InvalidArgument(format!("spin-lock time {spinlock_t} must be ≥ 0")));
    }
    let mut engine = Engine::new(params)?;
    let mut steps = hh.body(spinlock_t).to_vec();
    steps.push(SequenceStep::ideal(Channel::DS, PI / 2.0, PI / 2.0));
    steps.push(SequenceStep::RepolarizeNv);
    let (_, state) = engine.run_unchecked(&steps, &SpinState::nv_polarized())?;
    Ok(state)
}

/// Time-domain SEDOR trace read out after polarization transfer.
pub fn polarization_transfer_signal(
    params: &ClusterParams,
    hh: &HartmannHahn,
    spinlock_t: f64,
    tau_grid: &[f64],
    tppi_nu: Option<f64>,
) -> Result<Signal, ExperimentError> {
    let initial = transferred_state(params, hh, spinlock_t)?;
    let options = SedorOptions { tppi_nu, ..Default::default() };
    let mut signal = run_sedor_with(params, tau_grid, &options, &initial)?;
    signal.meta.protocol = "polarization_transfer".into();
    signal.meta = std::mem::take(&mut signal.meta)
        .with("spinlock_t_us", spinlock_t)
        .with("nv_phase_rad", hh.nv_phase)
        .with("rabi_mhz", hh.rabi);
    Ok(signal)
}

/// Polarization transfer at the default lock Rabi frequency, returned as the
/// zero-padded (×4) magnitude spectrum of the SEDOR readout.
pub fn run_polarization_transfer(
    params: &ClusterParams,
    spinlock_t: f64,
    nv_phase: f64,
    tau_grid: &[f64],
    tppi_nu: Option<f64>,
) -> Result<Spectrum, ExperimentError> {
    let hh = HartmannHahn { nv_phase, ..Default::default() };
    let signal = polarization_transfer_signal(params, &hh, spinlock_t, tau_grid, tppi_nu)?;
    Ok(compute_fft(&signal, 4, Window::None)?)
}
