use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::sequence::{validate_sequence, Channel, Drive, PulseEvent, PulseShape, SequenceStep};
use crate::error::PulseError;
use crate::spin::operators::*;
use crate::spin::{build_hamiltonian, ClusterParams, Hamiltonian, SpectralPropagator, SpinState};

/// Rotation `exp(−i θ (cos φ S_x + sin φ S_y))` on one two-level system.
pub fn rotation(axis_phase: f64, angle: f64) -> Op2 {
    let (s, c) = (0.5 * angle).sin_cos();
    let n = transverse(axis_phase) * Complex64::new(2.0, 0.0);
    identity2() * Complex64::new(c, 0.0) - n * Complex64::new(0.0, s)
}

/// Full-space unitary of an instantaneous pulse.
pub fn ideal_pulse_unitary(channel: Channel, axis_phase: f64, angle: f64) -> Op8 {
    let r = rotation(axis_phase, angle);
    match channel {
        Channel::NV => on_nv(&r),
        Channel::DS => kron3(&identity2(), &r, &r),
    }
}

/// Operator whose eigenvalues a carrier offset shifts on a channel.
fn frame_operator(channel: Channel) -> Op8 {
    match channel {
        Channel::NV => on_nv(&nv_excited_projector()),
        Channel::DS => total_dark_sz(),
    }
}

fn drive_operator(channel: Channel, phase: f64) -> Op8 {
    let t = transverse(phase);
    match channel {
        Channel::NV => on_nv(&t),
        Channel::DS => on_ds1(&t) + on_ds2(&t),
    }
}

/// Diagonal of `exp(−i 2π t Σ c K)` for the active channel carriers.
fn frame_rotation(carriers: &[(Channel, f64)], t: f64) -> [Complex64; DIM] {
    let mut out = [Complex64::new(1.0, 0.0); DIM];
    for &(ch, c) in carriers {
        if c == 0.0 {
            continue;
        }
        let k = frame_operator(ch);
        for (j, o) in out.iter_mut().enumerate() {
            *o *= Complex64::from_polar(1.0, -TAU * c * t * k[(j, j)].re);
        }
    }
    out
}

fn scale_rows(d: &[Complex64; DIM], m: &Op8) -> Op8 {
    let mut out = *m;
    for i in 0..DIM {
        for j in 0..DIM {
            out[(i, j)] *= d[i];
        }
    }
    out
}

fn scale_cols(m: &Op8, d: &[Complex64; DIM]) -> Op8 {
    let mut out = *m;
    for i in 0..DIM {
        for j in 0..DIM {
            out[(i, j)] *= d[j];
        }
    }
    out
}

/// Executes sequences against one cluster, tracking the sequence clock so
/// that drive phases stay coherent across pulses.
#[derive(Debug, Clone)]
pub struct Engine {
    hamiltonian: Hamiltonian,
    free: SpectralPropagator,
    clock: f64,
    cache: Option<(Vec<(Channel, Drive)>, SpectralPropagator)>,
}

impl Engine {
    pub fn new(params: &ClusterParams) -> Result<Self, PulseError> {
        let hamiltonian = build_hamiltonian(params)?;
        let free = SpectralPropagator::new(&hamiltonian);
        Ok(Self { hamiltonian, free, clock: 0.0, cache: None })
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn reset_clock(&mut self) {
        self.clock = 0.0;
    }

    pub fn free_evolution(&mut self, state: &SpinState, t: f64) -> SpinState {
        self.clock += t;
        if t == 0.0 {
            return state.clone();
        }
        state.transformed(&self.free.at(t))
    }

    /// Unitary for simultaneous rectangular drives starting at the current
    /// clock. Advances the clock by `duration`.
    pub fn driven_unitary(&mut self, drives: &[(Channel, Drive)], duration: f64) -> Result<Op8, PulseError> {
        let t0 = self.clock;
        self.clock += duration;
        if duration == 0.0 {
            return Ok(Op8::identity());
        }
        let key: Vec<(Channel, Drive)> = drives.to_vec();
        let prop = match &self.cache {
            Some((k, p)) if *k == key => p.clone(),
            _ => {
                let mut extra = Op8::zeros();
                for &(ch, d) in drives {
                    extra -= frame_operator(ch) * Complex64::new(d.detuning, 0.0);
                    extra += drive_operator(ch, d.phase) * Complex64::new(d.rabi, 0.0);
                }
                let h = self.hamiltonian.plus(&extra)?;
                let p = SpectralPropagator::new(&h);
                self.cache = Some((key, p.clone()));
                p
            }
        };
        let carriers: Vec<(Channel, f64)> = drives.iter().map(|&(c, d)| (c, d.detuning)).collect();
        let inner = prop.at(duration);
        let end = frame_rotation(&carriers, t0 + duration);
        let start: Vec<Complex64> = frame_rotation(&carriers, t0).iter().map(|z| z.conj()).collect();
        let start: [Complex64; DIM] = start.try_into().expect("dimension 8");
        Ok(scale_cols(&scale_rows(&end, &inner), &start))
    }

    pub fn apply_pulse(&mut self, state: &SpinState, pulse: &PulseEvent) -> Result<SpinState, PulseError> {
        pulse.validate()?;
        match pulse.shape {
            PulseShape::Ideal { axis_phase, angle } => {
                Ok(state.transformed(&ideal_pulse_unitary(pulse.channel, axis_phase, angle)))
            }
            PulseShape::Finite { drive, duration } => {
                let u = self.driven_unitary(&[(pulse.channel, drive)], duration)?;
                Ok(state.transformed(&u))
            }
        }
    }

    /// Runs the steps in order and records `Tr(|0⟩⟨0|_NV ρ)` at each readout.
    pub fn run(&mut self, seq: &[SequenceStep], initial: &SpinState) -> Result<ReadoutPair, PulseError> {
        validate_sequence(seq)?;
        let (readouts, _) = self.run_unchecked(seq, initial)?;
        Ok(ReadoutPair { y1: readouts[0], y2: readouts.get(1).copied() })
    }

    /// Runs the steps and returns every readout plus the final state.
    pub fn run_unchecked(
        &mut self,
        seq: &[SequenceStep],
        initial: &SpinState,
    ) -> Result<(Vec<f64>, SpinState), PulseError> {
        let mut state = initial.clone();
        let mut readouts = Vec::with_capacity(2);
        for step in seq {
            step.validate()?;
            state = match step {
                SequenceStep::Pulse(p) => self.apply_pulse(&state, p)?,
                SequenceStep::Delay { us } => self.free_evolution(&state, *us),
                SequenceStep::DualDrive { nv, ds, duration } => {
                    let u = self.driven_unitary(&[(Channel::NV, *nv), (Channel::DS, *ds)], *duration)?;
                    state.transformed(&u)
                }
                SequenceStep::RepolarizeNv => repolarize_nv(&state),
                SequenceStep::Readout => {
                    readouts.push(state.nv_ground_population().clamp(0.0, 1.0));
                    state
                }
            };
        }
        Ok((readouts, state))
    }
}

/// Two NV population readouts; `y2` is absent for unsymmetrized sequences.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ReadoutPair {
    pub y1: f64,
    pub y2: Option<f64>,
}

impl ReadoutPair {
    pub fn new(y1: f64, y2: f64) -> Self {
        Self { y1, y2: Some(y2) }
    }
}

/// Symmetrized contrast `(y2 − y1)/(y2 + y1)`.
pub fn contrast(pair: &ReadoutPair) -> Result<f64, PulseError> {
    let y2 = pair.y2.ok_or(PulseError::MissingSecondReadout)?;
    let sum = pair.y1 + y2;
    if sum == 0.0 {
        return Err(PulseError::UndefinedContrast);
    }
    Ok((y2 - pair.y1) / sum)
}

pub fn apply_ideal_pulse(state: &SpinState, channel: Channel, axis_phase: f64, angle: f64) -> SpinState {
    state.transformed(&ideal_pulse_unitary(channel, axis_phase, angle))
}

/// Rectangular x-phase pulse with the cluster Hamiltonian retained.
/// `carrier_offset` is measured from the channel's frame origin.
pub fn apply_finite_pulse(
    state: &SpinState,
    channel: Channel,
    rabi: f64,
    carrier_offset: f64,
    duration: f64,
    params: &ClusterParams,
) -> Result<SpinState, PulseError> {
    let mut engine = Engine::new(params)?;
    let pulse = PulseEvent::finite(channel, Drive { rabi, detuning: carrier_offset, phase: 0.0 }, duration);
    engine.apply_pulse(state, &pulse)
}

/// `ρ → |0⟩⟨0|_NV ⊗ Tr_NV ρ`.
pub fn repolarize_nv(state: &SpinState) -> SpinState {
    SpinState::from_density_unchecked(nv_times_pair(&nv_ground_projector(), &state.dark_reduced()))
}

pub fn run_sequence(
    seq: &[SequenceStep],
    params: &ClusterParams,
    initial: &SpinState,
) -> Result<ReadoutPair, PulseError> {
    Engine::new(params)?.run(seq, initial)
}

/// Symmetrized readout of `body`: the NV is closed with a π/2 of phase `φ`
/// (giving `y1`) or `φ + π` (giving `y2`). Both branches start from the same
/// state, so the body is evolved once and the two closing pulses applied to
/// copies of the result.
pub fn run_symmetrized(
    engine: &mut Engine,
    body: &[SequenceStep],
    final_phase: f64,
    initial: &SpinState,
) -> Result<ReadoutPair, PulseError> {
    engine.reset_clock();
    let (_, state) = engine.run_unchecked(body, initial)?;
    let read =
        |phase: f64| apply_ideal_pulse(&state, Channel::NV, phase, PI / 2.0).nv_ground_population().clamp(0.0, 1.0);
    Ok(ReadoutPair::new(read(final_phase), read(final_phase + PI)))
}
