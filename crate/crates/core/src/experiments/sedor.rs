use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{check_grid, params_json, sweep};
use crate::analytic::{sedor_frequencies, SedorModel};
use crate::error::ExperimentError;
use crate::pulse::{apply_decay_envelope, contrast, run_symmetrized, Channel, Drive, PulseEvent, SequenceStep};
use crate::signal::{uniform_step, Meta, Signal};
use crate::spin::{ClusterParams, SpinState};

/// How the dark spins are inverted at the echo centre.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DsPulse {
    /// Instantaneous π about x on both dark spins.
    #[default]
    Ideal,
    /// Rectangular x-phase π pulse of length `1/(2·rabi)`, centred on the NV π.
    Finite {
        #[serde(rename = "rabi_mhz")]
        rabi: f64,
        #[serde(rename = "detuning_mhz", default)]
        detuning: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SedorOptions {
    /// TPPI rate ν: the last π/2 has phase `2πντ`.
    #[serde(rename = "tppi_nu_mhz", default)]
    pub tppi_nu: Option<f64>,
    #[serde(rename = "t2_us", default)]
    pub t2: Option<f64>,
    #[serde(default = "one")]
    pub p: f64,
    #[serde(default)]
    pub ds_pulse: DsPulse,
}

fn one() -> f64 {
    1.0
}

impl Default for SedorOptions {
    fn default() -> Self {
        Self { tppi_nu: None, t2: None, p: 1.0, ds_pulse: DsPulse::Ideal }
    }
}

/// Dark-spin inversion placed symmetrically around the NV π.
#[derive(Debug, Clone, Copy)]
pub(crate) enum DarkFlip {
    Ideal,
    Finite { drive: Drive, duration: f64 },
}

/// `π/2, τ/2, (π_NV, DS flip), τ/2`, without the closing pulse.
///
/// A finite flip of length `T` is split in halves around the NV π and eats
/// `T/2` from each free period; for `τ < T` the free periods are zero.
pub(crate) fn echo_body(tau: f64, flip: DarkFlip) -> Vec<SequenceStep> {
    let mut body = vec![SequenceStep::ideal(Channel::NV, 0.0, PI / 2.0)];
    match flip {
        DarkFlip::Ideal => body.extend([
            SequenceStep::delay(tau / 2.0),
            SequenceStep::ideal(Channel::NV, 0.0, PI),
            SequenceStep::ideal(Channel::DS, 0.0, PI),
            SequenceStep::delay(tau / 2.0),
        ]),
        DarkFlip::Finite { drive, duration } => {
            let free = ((tau - duration) / 2.0).max(0.0);
            let half = SequenceStep::Pulse(PulseEvent::finite(Channel::DS, drive, duration / 2.0));
            body.extend([
                SequenceStep::delay(free),
                half,
                SequenceStep::ideal(Channel::NV, 0.0, PI),
                half,
                SequenceStep::delay(free),
            ]);
        }
    }
    body
}

fn max_frequency(params: &ClusterParams, all_lines: bool) -> f64 {
    let model = if all_lines { None } else { SedorModel::new(params).ok() };
    match model {
        Some(m) => m.lines().iter().filter(|(_, a)| a.abs() > 1e-9).map(|(f, _)| f.abs()).fold(0.0, f64::max),
        None => {
            let f = sedor_frequencies(params);
            [f.delta1, f.delta2, f.delta3.abs(), f.delta1 + f.delta2, f.delta4.abs()]
                .iter()
                .fold(0.0f64, |m, x| m.max(x / 2.0))
        }
    }
}

/// Largest τ step that samples every SEDOR line (shifted by ν) without aliasing.
///
/// Only lines with non-zero amplitude for unpolarized dark spins count.
pub fn nyquist_limit(params: &ClusterParams, tppi_nu: Option<f64>) -> f64 {
    0.5 / (max_frequency(params, false) + tppi_nu.unwrap_or(0.0).abs())
}

/// SEDOR with unpolarized dark spins and an ideal dark-spin π.
pub fn run_sedor(
    params: &ClusterParams,
    tau_grid: &[f64],
    tppi_nu: Option<f64>,
    t2: Option<f64>,
    p: f64,
) -> Result<Signal, ExperimentError> {
    let options = SedorOptions { tppi_nu, t2, p, ds_pulse: DsPulse::Ideal };
    run_sedor_with(params, tau_grid, &options, &SpinState::nv_polarized())
}

/// SEDOR from an arbitrary initial state.
///
/// For each τ: `π/2_x, τ/2, (π_NV + π_DS), τ/2, π/2_φ` read out
/// symmetrically, with `φ = 2πντ` under TPPI. The decay envelope, if any, is
/// applied to the finished trace.
pub fn run_sedor_with(
    params: &ClusterParams,
    tau_grid: &[f64],
    options: &SedorOptions,
    initial: &SpinState,
) -> Result<Signal, ExperimentError> {
    check_grid(tau_grid, "τ")?;
    if tau_grid[0] < 0.0 {
        return Err(ExperimentError::InvalidSweep("τ must be ≥ 0".into()));
    }
    let nu = options.tppi_nu.unwrap_or(0.0);
    if !nu.is_finite() {
        return Err(ExperimentError::InvalidArgument(format!("TPPI rate {nu} must be finite")));
    }
    let step = uniform_step(tau_grid)?;
    let unpolarized = initial.dark_reduced() == SpinState::maximally_mixed().dark_reduced();
    let limit = 0.5 / (max_frequency(params, !unpolarized) + nu.abs());
    if !(step < limit) {
        return Err(ExperimentError::Nyquist { step, limit });
    }
    let flip = match options.ds_pulse {
        DsPulse::Ideal => DarkFlip::Ideal,
        DsPulse::Finite { rabi, detuning } => {
            if !(rabi > 0.0) || !rabi.is_finite() {
                return Err(ExperimentError::InvalidArgument(format!("DS Rabi {rabi} must be > 0")));
            }
            DarkFlip::Finite { drive: Drive { rabi, detuning, phase: 0.0 }, duration: 0.5 / rabi }
        }
    };

    let values = sweep(params, tau_grid, |engine, tau| {
        let pair = run_symmetrized(engine, &echo_body(tau, flip), 2.0 * PI * nu * tau, initial)?;
        contrast(&pair)
    })?;
    let meta = Meta::new("sedor")
        .with("tppi_nu_mhz", nu)
        .with("t2_us", options.t2.map_or("none".to_string(), |t| t.to_string()))
        .with("p", options.p)
        .with("ds_pulse", serde_json::to_string(&options.ds_pulse).expect("plain enum"))
        .with("params", params_json(params));
    let signal = Signal::new(tau_grid.to_vec(), values, meta)?;
    match options.t2 {
        Some(t2) => Ok(apply_decay_envelope(&signal, t2, options.p)?),
        None => Ok(signal),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::pulse_error_dc;
    use crate::signal::linspace;

    #[test]
    fn matches_closed_form() {
        let p = ClusterParams::REFERENCE;
        let model = SedorModel::new(&p).unwrap();
        let taus = linspace(0.0, 20.0, 101);
        let s = run_sedor(&p, &taus, None, None, 1.0).unwrap();
        for (t, v) in taus.iter().zip(&s.values) {
            assert!((v - model.contrast(*t)).abs() < 1e-10, "τ={t}: {v} vs {}", model.contrast(*t));
        }
    }

    #[test]
    fn uncoupled_is_constant() {
        let s = run_sedor(&ClusterParams::uncoupled(), &linspace(0.0, 5.0, 20), None, None, 1.0).unwrap();
        for v in &s.values {
            assert!((v + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn j_sign_does_not_matter() {
        let p = ClusterParams::REFERENCE;
        let taus = linspace(0.0, 10.0, 64);
        let a = run_sedor(&p, &taus, Some(1.25), None, 1.0).unwrap();
        let b = run_sedor(&p.with_flipped_j(), &taus, Some(1.25), None, 1.0).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn tppi_is_a_phase_ramp() {
        // with φ = 2πντ the signal is Re[e^{iφ}]-mixed with its quadrature;
        // at τ where ντ is an integer it equals the plain trace
        let p = ClusterParams::REFERENCE;
        let taus = linspace(0.0, 8.0, 33);
        let plain = run_sedor(&p, &taus, None, None, 1.0).unwrap();
        let tppi = run_sedor(&p, &taus, Some(0.5), None, 1.0).unwrap();
        for k in (0..taus.len()).step_by(8) {
            assert!((plain.values[k] - tppi.values[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn nyquist_violation() {
        let p = ClusterParams::REFERENCE;
        let err = run_sedor(&p, &linspace(0.0, 20.0, 40), Some(1.25), None, 1.0).unwrap_err();
        assert!(matches!(err, ExperimentError::Nyquist { .. }));
        assert!(run_sedor(&p, &linspace(0.0, 20.0, 512), Some(1.25), None, 1.0).is_ok());
    }

    #[test]
    fn rejects_bad_grids() {
        let p = ClusterParams::REFERENCE;
        assert!(run_sedor(&p, &[], None, None, 1.0).is_err());
        assert!(run_sedor(&p, &[0.0, 0.1, 0.3], None, None, 1.0).is_err());
        assert!(run_sedor(&p, &[-0.1, 0.0, 0.1], None, None, 1.0).is_err());
        assert!(run_sedor(&p, &[0.0, 0.1], None, Some(0.0), 1.0).is_err());
    }

    #[test]
    fn decay_envelope_applied() {
        let p = ClusterParams::REFERENCE;
        let taus = linspace(0.0, 10.0, 64);
        let bare = run_sedor(&p, &taus, None, None, 1.0).unwrap();
        let damped = run_sedor(&p, &taus, None, Some(5.0), 2.0).unwrap();
        for (k, t) in taus.iter().enumerate() {
            let expect = bare.values[k] * (-(t / 5.0f64).powi(2)).exp();
            assert!((damped.values[k] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn ideal_limit_of_finite_pulse() {
        let p = ClusterParams::REFERENCE;
        let taus = linspace(0.5, 5.0, 16);
        let ideal = run_sedor(&p, &taus, None, None, 1.0).unwrap();
        let opts = SedorOptions { ds_pulse: DsPulse::Finite { rabi: 5000.0, detuning: 0.07 }, ..Default::default() };
        let finite = run_sedor_with(&p, &taus, &opts, &SpinState::nv_polarized()).unwrap();
        for (a, b) in ideal.values.iter().zip(&finite.values) {
            assert!((a - b).abs() < 1e-3, "{a} vs {b}");
        }
    }

    #[test]
    fn single_spin_pulse_error_offset() {
        // one coupled spin, the other far off resonance and uncoupled
        let p = ClusterParams::new(0.2, 0.0, 0.0, 0.0, 500.0, 694.0).unwrap();
        let (delta, rabi) = (1.0, 13.0);
        let carrier = 0.1 - delta;
        let taus = linspace(0.0, 40.0, 256);
        let opts = SedorOptions { ds_pulse: DsPulse::Finite { rabi, detuning: carrier }, ..Default::default() };
        let s = run_sedor_with(&p, &taus, &opts, &SpinState::nv_polarized()).unwrap();
        let (q, offset) = crate::analysis::linear_components(&s, &[0.1]).unwrap();
        // the far spin is not flipped, so the trace is −ε − (1 − ε)·cos
        let frac = offset / (offset + q[0].cos);
        let expect = pulse_error_dc(delta, rabi).unwrap();
        assert!((frac / expect - 1.0).abs() < 0.1, "{frac} vs {expect}");
    }
}
