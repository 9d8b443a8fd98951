use serde::{Deserialize, Serialize};

use super::sedor::{echo_body, DarkFlip};
use super::{check_grid, params_json, sweep};
use crate::error::ExperimentError;
use crate::pulse::{contrast, run_symmetrized, Channel, Drive, PulseEvent};
use crate::signal::{Meta, Signal};
use crate::spin::operators::sx_matrix_element;
use crate::spin::{ClusterParams, SpinState, GAMMA_E_MHZ_PER_G};

/// Fixed echo time of the DEER Rabi sweep, µs. Short enough that each
/// flipped dark spin imprints less than π of NV phase at the reference
/// couplings, so the trace is dominated by the DS Rabi frequency rather than
/// its second harmonic.
pub const DEER_RABI_TAU: f64 = 0.6;

/// Nutation frequency produced by a drive of amplitude `amp` (in units of
/// `γ·B₁`, MHz). The NV `|0⟩ ↔ |−1⟩` transition of a spin-1 couples √2 more
/// strongly than a spin-½.
pub fn rabi_from_amplitude(channel: Channel, amp: f64) -> f64 {
    let element = match channel {
        Channel::NV => sx_matrix_element(1.0, -1.0),
        Channel::DS => sx_matrix_element(0.5, -0.5),
    };
    2.0 * element * amp
}

fn check_rabi(rabi: f64) -> Result<(), ExperimentError> {
    if !(rabi >= 0.0) || !rabi.is_finite() {
        return Err(ExperimentError::InvalidArgument(format!("Rabi {rabi} must be finite and ≥ 0")));
    }
    Ok(())
}

fn check_durations(grid: &[f64]) -> Result<(), ExperimentError> {
    check_grid(grid, "pulse length")?;
    if grid[0] < 0.0 {
        return Err(ExperimentError::InvalidSweep("pulse lengths must be ≥ 0".into()));
    }
    Ok(())
}

/// NV nutation: ground population after a resonant NV pulse of each length.
pub fn run_nv_rabi(params: &ClusterParams, pulse_grid: &[f64], rabi: f64) -> Result<Signal, ExperimentError> {
    check_durations(pulse_grid)?;
    check_rabi(rabi)?;
    let initial = SpinState::nv_polarized();
    let values = sweep(params, pulse_grid, |engine, t| {
        engine.reset_clock();
        let pulse = PulseEvent::finite(Channel::NV, Drive::resonant(rabi), t);
        Ok(engine.apply_pulse(&initial, &pulse)?.nv_ground_population())
    })?;
    let meta = Meta::new("nv_rabi").with("rabi_mhz", rabi).with("params", params_json(params));
    Ok(Signal::new(pulse_grid.to_vec(), values, meta)?)
}

/// DEER Rabi: echo of fixed length [`DEER_RABI_TAU`] with a DS pulse of
/// swept length, carrier at the mean dark-spin frequency, split around the
/// NV π. The contrast oscillates at the DS Rabi frequency. Pulses longer
/// than the echo leave no free evolution.
pub fn run_deer_rabi(params: &ClusterParams, ds_pulse_grid: &[f64], ds_rabi: f64) -> Result<Signal, ExperimentError> {
    check_durations(ds_pulse_grid)?;
    check_rabi(ds_rabi)?;
    let carrier = (params.omega1 + params.omega2) / 2.0;
    let drive = Drive { rabi: ds_rabi, detuning: carrier, phase: 0.0 };
    let initial = SpinState::nv_polarized();
    let values = sweep(params, ds_pulse_grid, |engine, t| {
        let flip = DarkFlip::Finite { drive, duration: t };
        contrast(&run_symmetrized(engine, &echo_body(DEER_RABI_TAU, flip), 0.0, &initial)?)
    })?;
    let meta = Meta::new("deer_rabi")
        .with("tau_us", DEER_RABI_TAU)
        .with("ds_rabi_mhz", ds_rabi)
        .with("params", params_json(params));
    Ok(Signal::new(ds_pulse_grid.to_vec(), values, meta)?)
}

/// NV (`D − γB₀`) and dark-spin (`γB₀`) transition frequencies, MHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeemanLines {
    pub b0_gauss: Vec<f64>,
    pub nv_mhz: Vec<f64>,
    pub ds_mhz: Vec<f64>,
}

pub fn run_zeeman_scan(b0_grid: &[f64], zero_field_splitting: f64) -> Result<ZeemanLines, ExperimentError> {
    if b0_grid.iter().any(|b| !(*b >= 0.0) || !b.is_finite()) {
        return Err(ExperimentError::InvalidSweep("fields must be finite and ≥ 0".into()));
    }
    if !zero_field_splitting.is_finite() {
        return Err(ExperimentError::InvalidArgument("zero-field splitting must be finite".into()));
    }
    Ok(ZeemanLines {
        b0_gauss: b0_grid.to_vec(),
        nv_mhz: b0_grid.iter().map(|b| zero_field_splitting - GAMMA_E_MHZ_PER_G * b).collect(),
        ds_mhz: b0_grid.iter().map(|b| GAMMA_E_MHZ_PER_G * b).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::fit_damped_sines;
    use crate::signal::linspace;

    #[test]
    fn amplitude_ratio_is_root_two() {
        let r = rabi_from_amplitude(Channel::NV, 13.3) / rabi_from_amplitude(Channel::DS, 13.3);
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(rabi_from_amplitude(Channel::DS, 13.3), 13.3);
    }

    #[test]
    fn nv_nutation_frequency() {
        let s = run_nv_rabi(&ClusterParams::REFERENCE, &linspace(0.0, 0.5, 200), 18.8).unwrap();
        let f = fit_damped_sines(&s, 1).unwrap().value("f1").unwrap().abs();
        assert!((f - 18.8).abs() < 0.05, "{f}");
    }

    #[test]
    fn deer_rabi_without_drive_is_flat() {
        let s = run_deer_rabi(&ClusterParams::REFERENCE, &linspace(0.0, DEER_RABI_TAU, 32), 0.0).unwrap();
        for v in &s.values {
            assert!((v - s.values[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn zeeman_lines() {
        let z = run_zeeman_scan(&[0.0, 330.9], 2870.0).unwrap();
        assert_eq!((z.nv_mhz[0], z.ds_mhz[0]), (2870.0, 0.0));
        assert!((z.ds_mhz[1] - 927.3).abs() < 0.1);
        assert!(run_zeeman_scan(&[-1.0], 2870.0).is_err());
    }
}
