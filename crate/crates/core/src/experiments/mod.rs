//! Sweep drivers for the measurement protocols.
//!
//! Every driver evaluates its sweep points independently (in parallel) and
//! returns them in grid order. Dark spins start maximally mixed unless a
//! driver takes an explicit initial state.

mod esr;
mod hh;
mod rabi;
mod sedor;

use rayon::prelude::*;

pub use esr::{default_probe, run_deer_esr, run_nv_esr};
pub use hh::{
    polarization_transfer_signal, run_hartmann_hahn, run_hartmann_hahn_with, run_polarization_transfer,
    transferred_state, HartmannHahn,
};
pub use rabi::{rabi_from_amplitude, run_deer_rabi, run_nv_rabi, run_zeeman_scan, ZeemanLines, DEER_RABI_TAU};
pub use sedor::{nyquist_limit, run_sedor, run_sedor_with, DsPulse, SedorOptions};

use crate::error::{ExperimentError, PulseError};
use crate::pulse::Engine;
use crate::spin::ClusterParams;

fn check_grid(grid: &[f64], what: &str) -> Result<(), ExperimentError> {
    if grid.is_empty() {
        return Err(ExperimentError::InvalidSweep(format!("{what} grid is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(ExperimentError::InvalidSweep(format!("{what} grid has non-finite values")));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ExperimentError::InvalidSweep(format!("{what} grid must be strictly increasing")));
    }
    Ok(())
}

/// Maps `f` over the grid in parallel, one engine per worker, keeping order.
fn sweep<F>(params: &ClusterParams, grid: &[f64], f: F) -> Result<Vec<f64>, ExperimentError>
where
    F: Fn(&mut Engine, f64) -> Result<f64, PulseError> + Sync,
{
    let engine = Engine::new(params)?;
    let values: Result<Vec<f64>, PulseError> =
        grid.par_iter().map_init(|| engine.clone(), |eng, &x| f(eng, x)).collect();
    Ok(values?)
}

fn params_json(params: &ClusterParams) -> String {
    serde_json::to_string(params).expect("plain numeric struct")
}
