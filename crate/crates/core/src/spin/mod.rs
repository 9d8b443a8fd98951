//! Operators, the cluster Hamiltonian, propagators and density matrices.

mod hamiltonian;
pub mod operators;
mod params;
mod state;

pub use hamiltonian::{build_hamiltonian, propagator, Hamiltonian, SpectralPropagator};
pub use operators::{Op2, Op4, Op8};
pub use params::{
    dipolar_coupling, dipolar_prefactor_mhz_nm3, ClusterParams, CouplingKind, SpinGeometry, GAMMA_E_MHZ_PER_G,
};
pub use state::{evolve, SpinState};
