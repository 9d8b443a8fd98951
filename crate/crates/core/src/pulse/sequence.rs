use serde::{Deserialize, Serialize};

use crate::error::PulseError;

/// Drive channel. `DS` addresses both dark spins with one carrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    NV,
    DS,
}

/// Rectangular drive on one channel.
///
/// `detuning` is the carrier offset from the channel's frame origin: a dark
/// spin with frame frequency `ωᵢ` sees the drive detuned by `ωᵢ − detuning`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drive {
    #[serde(rename = "rabi_mhz")]
    pub rabi: f64,
    #[serde(rename = "detuning_mhz", default)]
    pub detuning: f64,
    #[serde(rename = "phase_rad", default)]
    pub phase: f64,
}

impl Drive {
    pub fn resonant(rabi: f64) -> Self {
        Self { rabi, detuning: 0.0, phase: 0.0 }
    }

    fn validate(&self) -> Result<(), PulseError> {
        if !(self.rabi >= 0.0) || !self.rabi.is_finite() {
            return Err(PulseError::InvalidPulse(format!("rabi {} must be ≥ 0", self.rabi)));
        }
        if !self.detuning.is_finite() || !self.phase.is_finite() {
            return Err(PulseError::InvalidPulse("non-finite drive parameter".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum PulseShape {
    /// Instantaneous rotation by `angle` about `cos φ x̂ + sin φ ŷ`.
    Ideal {
        #[serde(rename = "phase_rad")]
        axis_phase: f64,
        #[serde(rename = "angle_rad")]
        angle: f64,
    },
    /// Rectangular pulse with the cluster Hamiltonian kept on.
    Finite {
        #[serde(flatten)]
        drive: Drive,
        #[serde(rename = "duration_us")]
        duration: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseEvent {
    pub channel: Channel,
    #[serde(flatten)]
    pub shape: PulseShape,
}

impl PulseEvent {
    pub fn ideal(channel: Channel, axis_phase: f64, angle: f64) -> Self {
        Self { channel, shape: PulseShape::Ideal { axis_phase, angle } }
    }

    pub fn finite(channel: Channel, drive: Drive, duration: f64) -> Self {
        Self { channel, shape: PulseShape::Finite { drive, duration } }
    }

    pub fn validate(&self) -> Result<(), PulseError> {
        match self.shape {
            PulseShape::Ideal { axis_phase, angle } => {
                if !(angle >= 0.0) || !angle.is_finite() || !axis_phase.is_finite() {
                    return Err(PulseError::InvalidPulse(format!("angle {angle} must be finite and ≥ 0")));
                }
            }
            PulseShape::Finite { drive, duration } => {
                drive.validate()?;
                if !(duration >= 0.0) || !duration.is_finite() {
                    return Err(PulseError::InvalidPulse(format!("duration {duration} must be ≥ 0")));
                }
            }
        }
        Ok(())
    }

    /// Time the pulse occupies on the sequence clock.
    pub fn duration(&self) -> f64 {
        match self.shape {
            PulseShape::Ideal { .. } => 0.0,
            PulseShape::Finite { duration, .. } => duration,
        }
    }
}

/// One element of a pulse sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SequenceStep {
    Pulse(PulseEvent),
    Delay {
        us: f64,
    },
    /// Simultaneous drives on both channels, used for spin locking.
    DualDrive {
        nv: Drive,
        ds: Drive,
        #[serde(rename = "duration_us")]
        duration: f64,
    },
    RepolarizeNv,
    Readout,
}

impl SequenceStep {
    pub fn ideal(channel: Channel, axis_phase: f64, angle: f64) -> Self {
        Self::Pulse(PulseEvent::ideal(channel, axis_phase, angle))
    }

    pub fn delay(us: f64) -> Self {
        Self::Delay { us }
    }

    pub fn validate(&self) -> Result<(), PulseError> {
        match self {
            Self::Pulse(p) => p.validate(),
            Self::Delay { us } => {
                if !(*us >= 0.0) || !us.is_finite() {
                    Err(PulseError::InvalidPulse(format!("delay {us} must be ≥ 0")))
                } else {
                    Ok(())
                }
            }
            Self::DualDrive { nv, ds, duration } => {
                nv.validate()?;
                ds.validate()?;
                if !(*duration >= 0.0) || !duration.is_finite() {
                    return Err(PulseError::InvalidPulse(format!("duration {duration} must be ≥ 0")));
                }
                Ok(())
            }
            Self::RepolarizeNv | Self::Readout => Ok(()),
        }
    }
}

/// Checks every step and that there are one or two readout markers.
pub fn validate_sequence(seq: &[SequenceStep]) -> Result<(), PulseError> {
    for step in seq {
        step.validate()?;
    }
    let n = seq.iter().filter(|s| matches!(s, SequenceStep::Readout)).count();
    if n == 0 || n > 2 {
        return Err(PulseError::ReadoutCount(n));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_layout() {
        let steps = vec![
            SequenceStep::ideal(Channel::NV, 0.0, 1.25),
            SequenceStep::delay(0.5),
            SequenceStep::RepolarizeNv,
            SequenceStep::Readout,
        ];
        let s = serde_json::to_string(&steps).unwrap();
        assert_eq!(
            s,
            r#"[{"type":"pulse","channel":"NV","shape":"ideal","phase_rad":0.0,"angle_rad":1.25},{"type":"delay","us":0.5},{"type":"repolarize_nv"},{"type":"readout"}]"#
        );
        let back: Vec<SequenceStep> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, steps);
    }

    #[test]
    fn finite_pulse_round_trip() {
        let step = SequenceStep::Pulse(PulseEvent::finite(
            Channel::DS,
            Drive { rabi: 13.0, detuning: 1.0, phase: 0.5 },
            0.038,
        ));
        let s = serde_json::to_string(&step).unwrap();
        assert!(s.contains(r#""shape":"finite""#) && s.contains(r#""rabi_mhz":13.0"#), "{s}");
        let back: SequenceStep = serde_json::from_str(&s).unwrap();
        assert_eq!(back, step);
    }

    #[test]
    fn readout_count_enforced() {
        assert_eq!(validate_sequence(&[]), Err(PulseError::ReadoutCount(0)));
        let three = [SequenceStep::Readout; 3];
        assert_eq!(validate_sequence(&three), Err(PulseError::ReadoutCount(3)));
        assert!(validate_sequence(&[SequenceStep::Readout]).is_ok());
    }

    #[test]
    fn negative_values_rejected() {
        assert!(SequenceStep::delay(-1.0).validate().is_err());
        assert!(SequenceStep::ideal(Channel::DS, 0.0, -0.1).validate().is_err());
        let bad = PulseEvent::finite(Channel::NV, Drive::resonant(-1.0), 0.1);
        assert!(bad.validate().is_err());
    }
}
