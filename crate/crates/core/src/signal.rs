//! Sampled traces and spectra shared by the simulators and the analysis code.

use serde::{Deserialize, Serialize};

use crate::error::SignalError;

/// Free-form description of how a trace was produced.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub protocol: String,
    #[serde(default)]
    pub entries: Vec<(String, String)>,
}

impl Meta {
    pub fn new(protocol: impl Into<String>) -> Self {
        Self { protocol: protocol.into(), entries: Vec::new() }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Contrast sampled on a time grid (µs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: Meta,
}

const UNIFORM_TOL: f64 = 1e-9;

impl Signal {
    /// Checks lengths and that the time axis increases.
    pub fn new(times: Vec<f64>, values: Vec<f64>, meta: Meta) -> Result<Self, SignalError> {
        if times.len() != values.len() {
            return Err(SignalError::LengthMismatch(times.len(), values.len()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SignalError::NotIncreasing);
        }
        Ok(Self { times, values, meta })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sample spacing, or an error if the grid is not uniform.
    pub fn uniform_step(&self) -> Result<f64, SignalError> {
        uniform_step(&self.times)
    }

    pub fn with_values(&self, values: Vec<f64>) -> Self {
        Self { times: self.times.clone(), values, meta: self.meta.clone() }
    }
}

/// Spacing of a uniform grid with at least two points.
pub fn uniform_step(axis: &[f64]) -> Result<f64, SignalError> {
    if axis.len() < 2 {
        return Err(SignalError::TooShort(2));
    }
    let dt = (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64;
    if !(dt > 0.0) {
        return Err(SignalError::NotIncreasing);
    }
    let scale = dt.abs().max(axis[0].abs().max(axis[axis.len() - 1].abs()) * 1e-3);
    for (k, t) in axis.iter().enumerate() {
        if (t - (axis[0] + k as f64 * dt)).abs() > UNIFORM_TOL * scale.max(1.0) {
            return Err(SignalError::NonUniform);
        }
    }
    Ok(dt)
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n).map(|k| start + k as f64 * step).collect()
        }
    }
}

/// Magnitude (and optionally complex) values on a frequency axis in MHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub magnitudes: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complex: Option<Vec<(f64, f64)>>,
    pub meta: Meta,
}

impl Spectrum {
    pub fn new(freqs: Vec<f64>, magnitudes: Vec<f64>, meta: Meta) -> Result<Self, SignalError> {
        if freqs.len() != magnitudes.len() {
            return Err(SignalError::LengthMismatch(freqs.len(), magnitudes.len()));
        }
        if freqs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SignalError::NotIncreasing);
        }
        Ok(Self { freqs, magnitudes, complex: None, meta })
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Spacing of the frequency axis (assumed uniform).
    pub fn bin_width(&self) -> f64 {
        if self.freqs.len() < 2 {
            return 0.0;
        }
        (self.freqs[self.freqs.len() - 1] - self.freqs[0]) / (self.freqs.len() - 1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert_eq!(Signal::new(vec![0.0, 1.0], vec![1.0], Meta::default()), Err(SignalError::LengthMismatch(2, 1)));
        assert_eq!(Signal::new(vec![0.0, 0.0], vec![1.0, 1.0], Meta::default()), Err(SignalError::NotIncreasing));
        let s = Signal::new(vec![0.0, 1.0, 3.0], vec![0.0; 3], Meta::default()).unwrap();
        assert_eq!(s.uniform_step(), Err(SignalError::NonUniform));
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(0.0, 20.0, 512);
        assert_eq!(v.len(), 512);
        assert_eq!(v[0], 0.0);
        assert!((v[511] - 20.0).abs() < 1e-12);
        assert!((uniform_step(&v).unwrap() - 20.0 / 511.0).abs() < 1e-15);
    }
}
