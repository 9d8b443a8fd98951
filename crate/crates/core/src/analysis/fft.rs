use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::signal::{Signal, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    None,
    Hann,
}

impl std::str::FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Self::None),
            "hann" => Ok(Self::Hann),
            other => Err(format!("unknown window '{other}' (expected none or hann)")),
        }
    }
}

fn weights(window: Window, n: usize) -> Vec<f64> {
    match window {
        Window::None => vec![1.0; n],
        Window::Hann if n < 2 => vec![1.0; n],
        Window::Hann => (0..n).map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / (n - 1) as f64).cos()).collect(),
    }
}

/// One-sided amplitude spectrum.
///
/// The frequency step is `1/(pad·N·dt)`. Scaling is chosen so that a cosine
/// of amplitude `a` on a bin centre shows up with height `a` and a constant
/// `c` shows up as `c` in bin 0. The complex values carry the same scaling.
pub fn compute_fft(signal: &Signal, zero_pad_factor: usize, window: Window) -> Result<Spectrum, AnalysisError> {
    if zero_pad_factor < 1 {
        return Err(AnalysisError::InvalidArgument("zero_pad_factor must be ≥ 1".into()));
    }
    let dt = signal.uniform_step()?;
    let n = signal.len();
    let m = n * zero_pad_factor;
    let w = weights(window, n);
    let sum_w: f64 = w.iter().sum();
    let mut buf: Vec<Complex64> = signal
        .values
        .iter()
        .zip(&w)
        .map(|(v, w)| Complex64::new(v * w, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(m)
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let half = m / 2;
    let df = 1.0 / (m as f64 * dt);
    let mut freqs = Vec::with_capacity(half + 1);
    let mut mags = Vec::with_capacity(half + 1);
    let mut complex = Vec::with_capacity(half + 1);
    for (k, z) in buf.iter().take(half + 1).enumerate() {
        let scale = if k == 0 || (m.is_multiple_of(2) && k == half) { 1.0 } else { 2.0 } / sum_w;
        let z = z * scale;
        freqs.push(k as f64 * df);
        mags.push(z.norm());
        complex.push((z.re, z.im));
    }
    let mut meta = signal.meta.clone();
    meta.entries.push(("zero_pad_factor".into(), zero_pad_factor.to_string()));
    meta.entries.push((
        "window".into(),
        match window {
            Window::None => "none".into(),
            Window::Hann => "hann".to_string(),
        },
    ));
    let mut spec = Spectrum::new(freqs, mags, meta)?;
    spec.complex = Some(complex);
    Ok(spec)
}
