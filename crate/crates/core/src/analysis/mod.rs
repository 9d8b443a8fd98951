//! Spectra, peak fitting, multi-sine fitting, run-to-run ranges and noise.

mod extract;
mod fft;
pub mod lm;
mod lorentz;
mod noise;
mod peaks;
mod ranges;
mod sines;

pub use extract::{extract_from_signal, ExtractOptions, ExtractReport};
pub use fft::{compute_fft, Window};
pub use lm::{Estimate, FitResult};
pub use lorentz::{fit_lorentzians, fit_lorentzians_with, LorentzModel, LorentzOptions};
pub use noise::inject_noise;
pub use peaks::{dc_lobe_edge, largest_peaks, local_maxima, Peak, PeakSet};
pub use ranges::{propagate_ranges, RangeReport};
pub use sines::{
    fit_damped_sines, fit_damped_sines_with, fit_sines, linear_components, sine_curve, Quadrature, SineFitOptions,
    SineModel,
};
