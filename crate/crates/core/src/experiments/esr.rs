use super::sedor::{echo_body, DarkFlip};
use super::{check_grid, params_json, sweep};
use crate::error::ExperimentError;
use crate::pulse::{contrast, run_symmetrized, Channel, Drive, PulseEvent, PulseShape};
use crate::signal::{Meta, Spectrum};
use crate::spin::{ClusterParams, SpinState};

/// Weak NV π probe used for ESR: 0.3 MHz Rabi, `1/(2·0.3)` µs long.
pub fn default_probe() -> PulseEvent {
    let rabi = 0.3;
    PulseEvent::finite(Channel::NV, Drive::resonant(rabi), 0.5 / rabi)
}

/// NV ESR: NV ground population after a finite probe pulse at each carrier
/// offset (MHz from the bare NV transition). Dips sit at `±(A₁ − A₂)/2` and
/// `±(A₁ + A₂)/2`.
///
/// Only the probe's Rabi frequency, phase and duration are used; its own
/// detuning is replaced by the grid value.
pub fn run_nv_esr(
    params: &ClusterParams,
    freq_grid: &[f64],
    probe_pulse: &PulseEvent,
) -> Result<Spectrum, ExperimentError> {
    check_grid(freq_grid, "frequency")?;
    probe_pulse.validate()?;
    let PulseShape::Finite { drive, duration } = probe_pulse.shape else {
        return Err(ExperimentError::InvalidArgument("ESR probe must be a finite pulse".into()));
    };
    if probe_pulse.channel != Channel::NV {
        return Err(ExperimentError::InvalidArgument("ESR probe must drive the NV".into()));
    }
    let initial = SpinState::nv_polarized();
    let values = sweep(params, freq_grid, |engine, f| {
        engine.reset_clock();
        let pulse = PulseEvent::finite(Channel::NV, Drive { detuning: f, ..drive }, duration);
        Ok(engine.apply_pulse(&initial, &pulse)?.nv_ground_population())
    })?;
    let meta = Meta::new("nv_esr")
        .with("probe_rabi_mhz", drive.rabi)
        .with("probe_duration_us", duration)
        .with("params", params_json(params));
    Ok(Spectrum::new(freq_grid.to_vec(), values, meta)?)
}

/// DEER ESR: Hahn echo of total free time τ with a finite DS π pulse at each
/// carrier offset, split around the NV π. Returns the symmetrized contrast.
///
/// Carrier offsets are measured from the dark-spin frame origin, so a dark
/// spin with frame frequency `ωᵢ` is resonant at `ωᵢ` (plus its NV-state
/// dependent shift).
pub fn run_deer_esr(
    params: &ClusterParams,
    ds_freq_grid: &[f64],
    tau: f64,
    ds_rabi: f64,
) -> Result<Spectrum, ExperimentError> {
    check_grid(ds_freq_grid, "frequency")?;
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(ExperimentError::InvalidArgument(format!("τ = {tau} must be > 0")));
    }
    if !(ds_rabi > 0.0) || !ds_rabi.is_finite() {
        return Err(ExperimentError::InvalidArgument(format!("DS Rabi {ds_rabi} must be > 0")));
    }
    let initial = SpinState::nv_polarized();
    let duration = 0.5 / ds_rabi;
    let values = sweep(params, ds_freq_grid, |engine, f| {
        let flip = DarkFlip::Finite { drive: Drive { rabi: ds_rabi, detuning: f, phase: 0.0 }, duration };
        contrast(&run_symmetrized(engine, &echo_body(tau, flip), 0.0, &initial)?)
    })?;
    let meta =
        Meta::new("deer_esr").with("tau_us", tau).with("ds_rabi_mhz", ds_rabi).with("params", params_json(params));
    Ok(Spectrum::new(ds_freq_grid.to_vec(), values, meta)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    use crate::analysis::local_maxima;
    use crate::pulse::{Engine, SequenceStep};
    use crate::signal::linspace;

    fn dips(spec: &Spectrum) -> Vec<f64> {
        let inv: Vec<f64> = spec.magnitudes.iter().map(|m| 1.0 - m).collect();
        let mut d: Vec<(f64, f64)> = local_maxima(&spec.freqs, &inv).into_iter().filter(|(_, h)| *h > 0.15).collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0));
        d.into_iter().map(|(f, _)| f).collect()
    }

    #[test]
    fn uncoupled_single_dip() {
        let grid = linspace(-2.0, 2.0, 161);
        let s = run_nv_esr(&ClusterParams::uncoupled(), &grid, &default_probe()).unwrap();
        let d = dips(&s);
        assert_eq!(d.len(), 1);
        assert!(d[0].abs() < 1e-6);
        // resonant π pulse empties the ground state
        assert!(s.magnitudes[80] < 1e-12);
    }

    #[test]
    fn antisymmetric_couplings_give_symmetric_triplet() {
        let p = ClusterParams::new(1.0, -1.0, 0.0, 0.0, 0.0, 694.0).unwrap();
        let grid = linspace(-2.0, 2.0, 161);
        let s = run_nv_esr(&p, &grid, &default_probe()).unwrap();
        let d = dips(&s);
        assert_eq!(d.len(), 3, "{d:?}");
        assert!(d[1].abs() < 1e-6);
        assert!((d[0] + d[2]).abs() < 1e-6);
        for k in 0..grid.len() {
            assert!((s.magnitudes[k] - s.magnitudes[grid.len() - 1 - k]).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_ideal_probe() {
        let probe = PulseEvent::ideal(Channel::NV, 0.0, 1.0);
        assert!(run_nv_esr(&ClusterParams::REFERENCE, &[0.0], &probe).is_err());
    }

    fn plain_echo(p: &ClusterParams, tau: f64) -> f64 {
        let mut engine = Engine::new(p).unwrap();
        let body = [
            SequenceStep::ideal(Channel::NV, 0.0, PI / 2.0),
            SequenceStep::delay(tau / 2.0),
            SequenceStep::ideal(Channel::NV, 0.0, PI),
            SequenceStep::delay(tau / 2.0),
        ];
        contrast(&run_symmetrized(&mut engine, &body, 0.0, &SpinState::nv_polarized()).unwrap()).unwrap()
    }

    #[test]
    fn far_carrier_is_plain_echo() {
        let p = ClusterParams::REFERENCE;
        // the cluster evolves during the pulse too, so the total time is still τ
        let echo = plain_echo(&p, 3.0);
        let s = run_deer_esr(&p, &[-2000.0, 2000.0], 3.0, 13.0).unwrap();
        for v in &s.magnitudes {
            assert!((v - echo).abs() < 1e-3, "{v} vs {echo}");
        }
        let u = ClusterParams::uncoupled();
        assert!((plain_echo(&u, 3.0) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn deer_response_near_dark_spins() {
        let p = ClusterParams::REFERENCE;
        let grid = linspace(-20.0, 20.0, 81);
        let s = run_deer_esr(&p, &grid, 3.0, 13.0).unwrap();
        let echo = plain_echo(&p, 3.0);
        assert!((s.magnitudes[40] - echo).abs() > 0.1, "{} vs {echo}", s.magnitudes[40]);
    }
}
