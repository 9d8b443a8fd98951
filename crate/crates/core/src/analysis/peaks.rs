use serde::{Deserialize, Serialize};

use crate::signal::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// MHz.
    pub center: f64,
    /// Half width at half maximum, MHz.
    pub width: f64,
    pub amplitude: f64,
}

/// Peaks sorted by centre.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PeakSet {
    pub peaks: Vec<Peak>,
}

impl PeakSet {
    pub fn new(mut peaks: Vec<Peak>) -> Self {
        peaks.sort_by(|a, b| a.center.total_cmp(&b.center));
        Self { peaks }
    }

    pub fn centers(&self) -> Vec<f64> {
        self.peaks.iter().map(|p| p.center).collect()
    }

    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }
}

/// Local maxima of `y`, refined by a parabola through the three samples
/// around each maximum. Bin 0 counts when it exceeds bin 1. Returns
/// `(position, height)` in descending height order.
pub fn local_maxima(x: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    let n = y.len();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    if n == 1 {
        return vec![(x[0], y[0])];
    }
    if y[0] > y[1] {
        out.push((x[0], y[0]));
    }
    for k in 1..n - 1 {
        if y[k] > y[k - 1] && y[k] >= y[k + 1] {
            let (a, b, c) = (y[k - 1], y[k], y[k + 1]);
            let denom = a - 2.0 * b + c;
            let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
            let dx = x[k + 1] - x[k];
            out.push((x[k] + shift * dx, b - 0.25 * (a - c) * shift));
        }
    }
    if y[n - 1] > y[n - 2] {
        out.push((x[n - 1], y[n - 1]));
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1));
    out
}

/// The `n` tallest local maxima of a spectrum inside `[fmin, fmax]`.
pub fn largest_peaks(spectrum: &Spectrum, n: usize, fmin: f64, fmax: f64) -> Vec<(f64, f64)> {
    local_maxima(&spectrum.freqs, &spectrum.magnitudes)
        .into_iter()
        .filter(|(f, _)| *f >= fmin && *f <= fmax)
        .take(n)
        .collect()
}

/// Frequency of the first local minimum above DC, i.e. the edge of the
/// zero-frequency lobe.
pub fn dc_lobe_edge(spectrum: &Spectrum) -> f64 {
    let y = &spectrum.magnitudes;
    for k in 1..y.len().saturating_sub(1) {
        if y[k] <= y[k - 1] && y[k] < y[k + 1] {
            return spectrum.freqs[k];
        }
    }
    0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabolic_refinement_is_exact_for_parabola() {
        let x: Vec<f64> = (0..11).map(|k| k as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|x| 2.0 - (x - 0.537f64).powi(2)).collect();
        let m = local_maxima(&x, &y);
        assert_eq!(m.len(), 1);
        assert!((m[0].0 - 0.537).abs() < 1e-12);
        assert!((m[0].1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sorted_by_height() {
        let x: Vec<f64> = (0..7).map(|k| k as f64).collect();
        let y = [0.0, 1.0, 0.0, 3.0, 0.0, 2.0, 0.0];
        let m = local_maxima(&x, &y);
        let heights: Vec<f64> = m.iter().map(|p| p.1).collect();
        assert_eq!(heights.len(), 3);
        assert!(heights.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn peak_set_sorted() {
        let s = PeakSet::new(vec![
            Peak { center: 2.0, width: 0.1, amplitude: 1.0 },
            Peak { center: 1.0, width: 0.1, amplitude: 1.0 },
        ]);
        assert_eq!(s.centers(), vec![1.0, 2.0]);
    }
}
