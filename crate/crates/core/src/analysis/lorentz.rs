use nalgebra::DMatrix;

use super::lm::{levenberg_marquardt, FitResult, LeastSquares, LmConfig};
use super::peaks::{largest_peaks, Peak, PeakSet};
use crate::error::AnalysisError;
use crate::signal::Spectrum;

/// Sum of Lorentzians `Σ a w²/((f − c)² + w²)`, optionally plus a constant.
pub struct LorentzModel<'a> {
    pub freqs: &'a [f64],
    pub values: &'a [f64],
    pub n_peaks: usize,
    pub baseline: bool,
}

impl LorentzModel<'_> {
    pub fn evaluate(p: &[f64], n_peaks: usize, baseline: bool, f: f64) -> f64 {
        let mut y = if baseline { p[3 * n_peaks] } else { 0.0 };
        for k in 0..n_peaks {
            let (c, w, a) = (p[3 * k], p[3 * k + 1], p[3 * k + 2]);
            let w2 = w * w;
            y += a * w2 / ((f - c).powi(2) + w2);
        }
        y
    }
}

impl LeastSquares for LorentzModel<'_> {
    fn n_residuals(&self) -> usize {
        self.freqs.len()
    }

    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        for (i, (&f, &y)) in self.freqs.iter().zip(self.values).enumerate() {
            out[i] = LorentzModel::evaluate(p, self.n_peaks, self.baseline, f) - y;
        }
    }

    fn jacobian(&self, p: &[f64], out: &mut DMatrix<f64>) {
        for (i, &f) in self.freqs.iter().enumerate() {
            for k in 0..self.n_peaks {
                let (c, w, a) = (p[3 * k], p[3 * k + 1], p[3 * k + 2]);
                let x = f - c;
                let w2 = w * w;
                let d = x * x + w2;
                out[(i, 3 * k)] = 2.0 * a * w2 * x / (d * d);
                out[(i, 3 * k + 1)] = 2.0 * a * w * x * x / (d * d);
                out[(i, 3 * k + 2)] = w2 / d;
            }
            if self.baseline {
                out[(i, 3 * self.n_peaks)] = 1.0;
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LorentzOptions {
    pub baseline: bool,
    /// Only spectrum points inside `[fmin, fmax]` enter the fit.
    pub fmin: f64,
    pub fmax: f64,
    pub lm: LmConfig,
}

impl Default for LorentzOptions {
    fn default() -> Self {
        Self { baseline: true, fmin: f64::NEG_INFINITY, fmax: f64::INFINITY, lm: LmConfig::default() }
    }
}

/// Fits `n_peaks` Lorentzians with default options.
pub fn fit_lorentzians(
    spectrum: &Spectrum,
    n_peaks: usize,
    init: Option<&PeakSet>,
) -> Result<(FitResult, PeakSet), AnalysisError> {
    fit_lorentzians_with(spectrum, n_peaks, init, &LorentzOptions::default())
}

/// Nonlinear least-squares Lorentzian fit. Without `init`, starts from the
/// `n_peaks` tallest local maxima with a two-bin half width.
///
/// Result names: `center{k}`, `width{k}`, `amplitude{k}` (k from 1 in
/// ascending centre order) and `baseline`.
pub fn fit_lorentzians_with(
    spectrum: &Spectrum,
    n_peaks: usize,
    init: Option<&PeakSet>,
    options: &LorentzOptions,
) -> Result<(FitResult, PeakSet), AnalysisError> {
    if n_peaks == 0 {
        return Err(AnalysisError::InvalidArgument("n_peaks must be ≥ 1".into()));
    }
    let (freqs, values): (Vec<f64>, Vec<f64>) = spectrum
        .freqs
        .iter()
        .zip(&spectrum.magnitudes)
        .filter(|(f, _)| **f >= options.fmin && **f <= options.fmax)
        .map(|(f, y)| (*f, *y))
        .unzip();
    let n_params = 3 * n_peaks + usize::from(options.baseline);
    if freqs.len() <= n_params {
        return Err(AnalysisError::InvalidArgument(format!(
            "{} points cannot constrain {n_params} parameters",
            freqs.len()
        )));
    }
    let bin = (freqs[freqs.len() - 1] - freqs[0]) / (freqs.len() - 1) as f64;
    let baseline0 = if options.baseline {
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        sorted[sorted.len() / 10]
    } else {
        0.0
    };
    let start: Vec<Peak> = match init {
        Some(set) => {
            if set.len() != n_peaks {
                return Err(AnalysisError::InvalidArgument(format!(
                    "initial peak set has {} peaks, expected {n_peaks}",
                    set.len()
                )));
            }
            set.peaks.clone()
        }
        None => {
            let sub = Spectrum {
                freqs: freqs.clone(),
                magnitudes: values.clone(),
                complex: None,
                meta: spectrum.meta.clone(),
            };
            let found = largest_peaks(&sub, n_peaks, f64::NEG_INFINITY, f64::INFINITY);
            if found.len() < n_peaks {
                return Err(AnalysisError::NotEnoughPeaks { found: found.len(), needed: n_peaks });
            }
            found.into_iter().map(|(c, h)| Peak { center: c, width: 2.0 * bin, amplitude: h - baseline0 }).collect()
        }
    };
    let mut p0 = Vec::with_capacity(n_params);
    for pk in &start {
        p0.extend_from_slice(&[pk.center, pk.width.abs().max(bin * 0.5), pk.amplitude]);
    }
    if options.baseline {
        p0.push(baseline0);
    }
    let model = LorentzModel { freqs: &freqs, values: &values, n_peaks, baseline: options.baseline };
    let outcome = levenberg_marquardt(&model, &p0, &options.lm);
    let ci = outcome.ci95();
    let mut order: Vec<usize> = (0..n_peaks).collect();
    order.sort_by(|&a, &b| outcome.params[3 * a].total_cmp(&outcome.params[3 * b]));
    let mut result = FitResult::from_outcome(&outcome);
    let mut peaks = Vec::with_capacity(n_peaks);
    for (rank, &k) in order.iter().enumerate() {
        let idx = rank + 1;
        let (c, w, a) = (outcome.params[3 * k], outcome.params[3 * k + 1].abs(), outcome.params[3 * k + 2]);
        result.insert(format!("center{idx}"), c, ci[3 * k]);
        result.insert(format!("width{idx}"), w, ci[3 * k + 1]);
        result.insert(format!("amplitude{idx}"), a, ci[3 * k + 2]);
        peaks.push(Peak { center: c, width: w, amplitude: a });
    }
    if options.baseline {
        result.insert("baseline", outcome.params[3 * n_peaks], ci[3 * n_peaks]);
    }
    Ok((result, PeakSet::new(peaks)))
}
