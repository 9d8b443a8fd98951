//! Pulse sequences and their execution against the cluster Hamiltonian.

mod engine;
mod sequence;

pub use engine::{
    apply_finite_pulse, apply_ideal_pulse, contrast, ideal_pulse_unitary, repolarize_nv, rotation, run_sequence,
    run_symmetrized, Engine, ReadoutPair,
};
pub use sequence::{validate_sequence, Channel, Drive, PulseEvent, PulseShape, SequenceStep};

use crate::error::PulseError;
use crate::signal::Signal;

/// Multiplies each sample at time `t` by `exp(−(t/t2)^p)`.
pub fn apply_decay_envelope(signal: &Signal, t2: f64, p: f64) -> Result<Signal, PulseError> {
    if !(t2 > 0.0) {
        return Err(PulseError::BadDecayTime(t2));
    }
    let values = signal.times.iter().zip(&signal.values).map(|(t, v)| v * (-(t.abs() / t2).powf(p)).exp()).collect();
    Ok(signal.with_values(values))
}
