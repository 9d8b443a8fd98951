//! Simulation and analysis of a probe spin coupled to two dark electron spins.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod analytic;
pub mod error;
pub mod experiments;
pub mod io;
pub mod pulse;
pub mod signal;
pub mod spin;

pub use error::Error;
pub use signal::{linspace, Meta, Signal, Spectrum};
pub use spin::{ClusterParams, SpinState};
