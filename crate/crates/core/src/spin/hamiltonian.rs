use nalgebra::{SVector, SymmetricEigen};
use num_complex::Complex64;

use super::operators::*;
use super::params::ClusterParams;
use crate::error::SpinError;

/// Cluster Hamiltonian in MHz on the NV ⊗ dark ⊗ dark space.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    matrix: Op8,
}

impl Hamiltonian {
    /// Wraps a matrix after checking Hermiticity to 1e−12 relative.
    pub fn from_matrix(matrix: Op8) -> Result<Self, SpinError> {
        let scale = matrix.norm().max(1.0);
        let defect = hermiticity_defect(&matrix);
        if defect > 1e-12 * scale {
            return Err(SpinError::NotHermitian(defect));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Op8 {
        &self.matrix
    }

    /// `H + extra`, for drive and frame terms added on top of the cluster.
    pub fn plus(&self, extra: &Op8) -> Result<Self, SpinError> {
        Self::from_matrix(self.matrix + extra)
    }

    /// Real eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Builds the secular cluster Hamiltonian
/// `Σᵢ (ωᵢ + Aᵢ P₋₁) S_z⁽ⁱ⁾ + J₁₂ (2 S_z⁽¹⁾S_z⁽²⁾ − ½(S₊⁽¹⁾S₋⁽²⁾ + S₋⁽¹⁾S₊⁽²⁾))`.
pub fn build_hamiltonian(params: &ClusterParams) -> Result<Hamiltonian, SpinError> {
    params.validate()?;
    let c = |x: f64| Complex64::new(x, 0.0);
    let p = nv_excited_projector();
    let id = identity2();
    let z1 = on_ds1(&sz());
    let z2 = on_ds2(&sz());
    let mut h = z1 * c(params.omega1) + z2 * c(params.omega2);
    h += kron3(&p, &sz(), &id) * c(params.a1);
    h += kron3(&p, &id, &sz()) * c(params.a2);
    let flip_flop = kron3(&id, &s_plus(), &s_minus()) + kron3(&id, &s_minus(), &s_plus());
    h += (z1 * z2 * c(2.0) - flip_flop * c(0.5)) * c(params.j12);
    Hamiltonian::from_matrix(h)
}

/// Unitary `exp(−i 2π H t)` for a Hamiltonian in MHz and `t` in µs.
pub fn propagator(h: &Hamiltonian, t: f64) -> Result<Op8, SpinError> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(SpinError::NegativeTime(t));
    }
    Ok(SpectralPropagator::new(h).at(t))
}

/// Eigendecomposition of a Hamiltonian, reusable for many evolution times.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    vectors: Op8,
    energies: SVector<f64, 8>,
}

impl SpectralPropagator {
    pub fn new(h: &Hamiltonian) -> Self {
        let eig = SymmetricEigen::new(h.matrix);
        Self { vectors: eig.eigenvectors, energies: eig.eigenvalues }
    }

    /// `exp(−i 2π H t)`. Negative `t` gives the inverse.
    pub fn at(&self, t: f64) -> Op8 {
        let mut scaled = self.vectors;
        for k in 0..DIM {
            let phase = Complex64::from_polar(1.0, -std::f64::consts::TAU * self.energies[k] * t);
            let mut col = scaled.column_mut(k);
            col *= phase;
        }
        scaled * self.vectors.adjoint()
    }

    pub fn energies(&self) -> &SVector<f64, 8> {
        &self.energies
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(nv: usize, s1: usize, s2: usize) -> usize {
        nv * 4 + s1 * 2 + s2
    }

    #[test]
    fn flip_flop_element() {
        let h = build_hamiltonian(&ClusterParams::REFERENCE).unwrap();
        for nv in 0..2 {
            let v = h.matrix()[(idx(nv, 0, 1), idx(nv, 1, 0))];
            assert!((v.re + 0.19).abs() < 1e-15 && v.im == 0.0);
        }
    }

    #[test]
    fn excited_manifold_gradient() {
        let h = build_hamiltonian(&ClusterParams::REFERENCE).unwrap();
        let up_down = h.matrix()[(idx(1, 0, 1), idx(1, 0, 1))].re;
        let down_up = h.matrix()[(idx(1, 1, 0), idx(1, 1, 0))].re;
        assert!((up_down - down_up - 1.81).abs() < 1e-12);
    }

    #[test]
    fn diagonal_without_j() {
        let p = ClusterParams { j12: 0.0, ..ClusterParams::REFERENCE };
        let h = build_hamiltonian(&p).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                if i != j {
                    assert_eq!(h.matrix()[(i, j)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let h = build_hamiltonian(&ClusterParams::REFERENCE).unwrap();
        let u = propagator(&h, 0.0).unwrap();
        assert!((u - Op8::identity()).norm() < 1e-12);
    }

    #[test]
    fn diagonal_phases() {
        let mut m = Op8::zeros();
        let energies = [0.3, -1.2, 0.0, 2.5, 0.7, -0.1, 4.0, 1.1];
        for (k, e) in energies.iter().enumerate() {
            m[(k, k)] = Complex64::new(*e, 0.0);
        }
        let h = Hamiltonian::from_matrix(m).unwrap();
        let t = 0.37;
        let u = propagator(&h, t).unwrap();
        for (k, e) in energies.iter().enumerate() {
            let expected = Complex64::new(0.0, -2.0 * std::f64::consts::PI * e * t).exp();
            assert!((u[(k, k)] - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn ground_manifold_gap() {
        let p = ClusterParams::REFERENCE;
        let h = build_hamiltonian(&p).unwrap();
        // 2x2 single-excitation block with NV in |0⟩
        let a = idx(0, 0, 1);
        let b = idx(0, 1, 0);
        let (haa, hbb, hab) = (h.matrix()[(a, a)].re, h.matrix()[(b, b)].re, h.matrix()[(a, b)].re);
        let gap = ((haa - hbb).powi(2) + 4.0 * hab * hab).sqrt();
        let expected = (p.j12.powi(2) + (p.omega1 - p.omega2).powi(2)).sqrt();
        assert!((gap - expected).abs() < 1e-12);
    }

    #[test]
    fn negative_time_rejected() {
        let h = build_hamiltonian(&ClusterParams::REFERENCE).unwrap();
        assert!(propagator(&h, -1.0).is_err());
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = Op8::zeros();
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(Hamiltonian::from_matrix(m).is_err());
    }
}
