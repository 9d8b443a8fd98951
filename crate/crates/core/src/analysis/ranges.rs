use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::lm::FitResult;
use crate::error::AnalysisError;

/// Spread of each parameter over repeated fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeReport {
    /// `(max + σ_max) − (min − σ_min)` with `σ = ci95 + bin/2`.
    pub ranges: BTreeMap<String, f64>,
    /// Mean of the `delta1` and `delta2` ranges over `2√2`, when both exist.
    pub parameter_error: Option<f64>,
}

/// Reproducibility range of every parameter common to all `fits`.
pub fn propagate_ranges(fits: &[FitResult], bin_width: f64) -> Result<RangeReport, AnalysisError> {
    if fits.len() < 2 {
        return Err(AnalysisError::InvalidArgument(format!("need ≥ 2 fits, got {}", fits.len())));
    }
    if !(bin_width >= 0.0) {
        return Err(AnalysisError::InvalidArgument(format!("bin width {bin_width} must be ≥ 0")));
    }
    let mut ranges = BTreeMap::new();
    for name in fits[0].params.keys() {
        let Some(est): Option<Vec<_>> = fits.iter().map(|f| f.get(name)).collect() else {
            continue;
        };
        let sigma = |k: usize| est[k].ci95 + bin_width / 2.0;
        let (imax, _) = est.iter().enumerate().max_by(|a, b| a.1.value.total_cmp(&b.1.value)).expect("non-empty");
        let (imin, _) = est.iter().enumerate().min_by(|a, b| a.1.value.total_cmp(&b.1.value)).expect("non-empty");
        let range = (est[imax].value + sigma(imax)) - (est[imin].value - sigma(imin));
        ranges.insert(name.clone(), range);
    }
    let parameter_error = match (ranges.get("delta1"), ranges.get("delta2")) {
        (Some(a), Some(b)) => Some((a + b) / 2.0 / (2.0 * 2f64.sqrt())),
        _ => None,
    };
    Ok(RangeReport { ranges, parameter_error })
}
