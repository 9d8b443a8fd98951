use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use super::operators::*;
use crate::error::SpinError;

/// Density matrix on the NV ⊗ dark ⊗ dark space.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinState {
    rho: Op8,
}

impl SpinState {
    /// Validates trace, Hermiticity and positivity before wrapping.
    pub fn from_density(rho: Op8) -> Result<Self, SpinError> {
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(SpinError::BadTrace(tr.re));
        }
        let defect = hermiticity_defect(&rho);
        if defect > 1e-12 {
            return Err(SpinError::NotHermitian(defect));
        }
        let min = SymmetricEigen::new(rho).eigenvalues.min();
        if min < -1e-10 {
            return Err(SpinError::NegativeEigenvalue(min));
        }
        Ok(Self { rho })
    }

    /// Wraps a matrix that is known to be a density matrix by construction.
    pub(crate) fn from_density_unchecked(rho: Op8) -> Self {
        Self { rho }
    }

    /// `|ψ⟩⟨ψ|` for a vector normalised internally.
    pub fn pure(psi: &nalgebra::SVector<Complex64, 8>) -> Result<Self, SpinError> {
        let n = psi.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(SpinError::BadTrace(0.0));
        }
        let v = psi / Complex64::new(n, 0.0);
        Ok(Self { rho: v * v.adjoint() })
    }

    /// `|nv⟩⟨nv| ⊗ ρ_DS`.
    pub fn product(nv: &Op2, dark: &Op4) -> Result<Self, SpinError> {
        Self::from_density(nv_times_pair(nv, dark))
    }

    /// NV in `|0⟩`, dark spins maximally mixed.
    pub fn nv_polarized() -> Self {
        let dark = Op4::identity() * Complex64::new(0.25, 0.0);
        Self { rho: nv_times_pair(&nv_ground_projector(), &dark) }
    }

    /// NV in `|0⟩`, dark spins in the supplied state.
    pub fn nv_polarized_with_dark(dark: &Op4) -> Result<Self, SpinError> {
        Self::product(&nv_ground_projector(), dark)
    }

    pub fn maximally_mixed() -> Self {
        Self { rho: Op8::identity() * Complex64::new(0.125, 0.0) }
    }

    pub fn rho(&self) -> &Op8 {
        &self.rho
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    /// `Tr(O ρ)`, real part.
    pub fn expectation(&self, op: &Op8) -> f64 {
        (op * self.rho).trace().re
    }

    /// Population of the NV `|0⟩` state.
    pub fn nv_ground_population(&self) -> f64 {
        (0..4).map(|k| self.rho[(k, k)].re).sum()
    }

    /// Reduced dark-spin state `Tr_NV ρ`.
    pub fn dark_reduced(&self) -> Op4 {
        let mut out = Op4::zeros();
        for nv in 0..2 {
            for i in 0..4 {
                for j in 0..4 {
                    out[(i, j)] += self.rho[(nv * 4 + i, nv * 4 + j)];
                }
            }
        }
        out
    }

    /// Reduced NV state `Tr_DS ρ`.
    pub fn nv_reduced(&self) -> Op2 {
        let mut out = Op2::zeros();
        for a in 0..2 {
            for b in 0..2 {
                for k in 0..4 {
                    out[(a, b)] += self.rho[(a * 4 + k, b * 4 + k)];
                }
            }
        }
        out
    }

    /// `U ρ U†` without the unitarity check.
    pub(crate) fn transformed(&self, u: &Op8) -> Self {
        Self { rho: u * self.rho * u.adjoint() }
    }
}

/// `ρ → U ρ U†`, rejecting inputs with `‖U†U − I‖ > 1e−8`.
pub fn evolve(state: &SpinState, u: &Op8) -> Result<SpinState, SpinError> {
    let defect = unitarity_defect(u);
    if defect > 1e-8 {
        return Err(SpinError::NotUnitary(defect));
    }
    Ok(state.transformed(u))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_leaves_state() {
        let s = SpinState::nv_polarized();
        let out = evolve(&s, &Op8::identity()).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn reduced_states() {
        let s = SpinState::nv_polarized();
        assert!((s.nv_ground_population() - 1.0).abs() < 1e-15);
        assert!((s.dark_reduced() - Op4::identity() * Complex64::new(0.25, 0.0)).norm() < 1e-15);
        assert!((s.nv_reduced() - nv_ground_projector()).norm() < 1e-15);
    }

    #[test]
    fn rejects_non_unitary() {
        let s = SpinState::maximally_mixed();
        let m = Op8::identity() * Complex64::new(1.1, 0.0);
        assert!(matches!(evolve(&s, &m), Err(SpinError::NotUnitary(_))));
    }

    #[test]
    fn rejects_bad_density() {
        assert!(SpinState::from_density(Op8::identity()).is_err());
        let mut m = Op8::zeros();
        m[(0, 0)] = Complex64::new(1.5, 0.0);
        m[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(matches!(SpinState::from_density(m), Err(SpinError::NegativeEigenvalue(_))));
    }
}
