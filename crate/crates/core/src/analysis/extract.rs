use serde::{Deserialize, Serialize};

use super::fft::{compute_fft, Window};
use super::lm::{Estimate, FitResult};
use super::lorentz::{fit_lorentzians_with, LorentzOptions};
use super::peaks::dc_lobe_edge;
use super::sines::{fit_sines, SineFitOptions};
use crate::analytic::{extract_cluster_params, extraction_uncertainty, ExtractedParams};
use crate::error::AnalysisError;
use crate::signal::Signal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractOptions {
    /// Full NV ESR splitting `A₁ − A₂`, MHz.
    pub esr_splitting: f64,
    /// 95% half-width on the splitting.
    pub esr_ci95: f64,
    /// Upper bound on `|A₁ + A₂|`, MHz.
    pub delta4_bound: f64,
    pub zero_pad_factor: usize,
    pub window: Window,
    /// Fit a stretched-exponential envelope in the time-domain stage.
    pub decay: bool,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            esr_splitting: 1.67,
            esr_ci95: 0.0,
            delta4_bound: 0.10,
            zero_pad_factor: 4,
            window: Window::None,
            decay: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractReport {
    /// Three-Lorentzian fit to the magnitude spectrum.
    pub lorentz: FitResult,
    /// Time-domain refinement.
    pub sines: FitResult,
    pub delta1: Estimate,
    pub delta2: Estimate,
    pub delta3: Estimate,
    pub params: ExtractedParams,
    pub j12_ci95: f64,
    pub delta_ci95: f64,
    pub converged: bool,
}

impl ExtractReport {
    /// Flat summary in the common fit-result shape.
    pub fn to_fit_result(&self) -> FitResult {
        let mut out = FitResult {
            params: Default::default(),
            residual: self.sines.residual,
            converged: self.converged,
            iterations: self.lorentz.iterations + self.sines.iterations,
        };
        out.insert("delta1", self.delta1.value, self.delta1.ci95);
        out.insert("delta2", self.delta2.value, self.delta2.ci95);
        out.insert("delta3", self.delta3.value, self.delta3.ci95);
        out.insert("j12", self.params.j12, self.j12_ci95);
        out.insert("delta", self.params.delta, self.delta_ci95);
        out.insert("a_diff", self.params.a_diff, 0.0);
        out.insert("a1", self.params.a1, self.params.a_individual_uncertainty);
        out.insert("a2", self.params.a2, self.params.a_individual_uncertainty);
        out
    }
}

/// SEDOR trace → couplings.
///
/// The magnitude spectrum is fitted with three Lorentzians above the
/// zero-frequency lobe; ascending centres are taken as Δ₁/2, Δ₃/2, Δ₂/2.
/// Those seed a time-domain fit of five sines (a slow term for DC and Δ₄/2,
/// the three lines and (Δ₁ + Δ₂)/2) plus a constant, which removes the
/// line-shape bias of the Lorentzian approximation. The refined Δ₁ and Δ₂
/// and the supplied ESR splitting are inverted with
/// [`extract_cluster_params`].
pub fn extract_from_signal(signal: &Signal, options: &ExtractOptions) -> Result<ExtractReport, AnalysisError> {
    let spectrum = compute_fft(signal, options.zero_pad_factor, options.window)?;
    let lorentz_opts = LorentzOptions { fmin: dc_lobe_edge(&spectrum), ..LorentzOptions::default() };
    let (lorentz, peaks) = fit_lorentzians_with(&spectrum, 3, None, &lorentz_opts)?;
    let c = peaks.centers();
    let (f1, f3, f2) = (c[0], c[1], c[2]);

    let span = signal.times[signal.len() - 1] - signal.times[0];
    let seeds = [0.5 / span, f1, f3, f2, f1 + f2];
    let mut sine_opts = SineFitOptions::new(seeds.to_vec());
    sine_opts.decay = options.decay;
    let sines = fit_sines(signal, &sine_opts)?;

    // match refined components back to their seeds
    let fitted: Vec<Estimate> = (1..=seeds.len()).filter_map(|k| sines.get(&format!("f{k}"))).collect();
    let nearest = |target: f64| {
        *fitted
            .iter()
            .min_by(|a, b| (a.value - target).abs().total_cmp(&(b.value - target).abs()))
            .expect("five components")
    };
    let (e1, e3, e2) = (nearest(f1), nearest(f3), nearest(f2));
    let twice = |e: Estimate| Estimate { value: 2.0 * e.value, ci95: 2.0 * e.ci95 };
    let (delta1, delta2, delta3) = (twice(e1), twice(e2), twice(e3));

    let params = extract_cluster_params(delta1.value, delta2.value, options.esr_splitting, options.delta4_bound)?;
    let (j12_ci95, delta_ci95) =
        extraction_uncertainty(&params, delta1.value, delta2.value, [delta1.ci95, delta2.ci95, options.esr_ci95]);
    Ok(ExtractReport {
        converged: sines.converged,
        lorentz,
        sines,
        delta1,
        delta2,
        delta3,
        params,
        j12_ci95,
        delta_ci95,
    })
}
