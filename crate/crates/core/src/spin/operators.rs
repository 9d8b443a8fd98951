//! Spin matrices on the NV ⊗ dark ⊗ dark product space.
//!
//! Basis ordering is `|nv⟩ ⊗ |s1⟩ ⊗ |s2⟩` with flat index `nv * 4 + s1 * 2 + s2`.
//! NV index 0 is `|0⟩`, index 1 is `|−1⟩`. Dark-spin index 0 is `|↑⟩`
//! (S_z = +1/2), index 1 is `|↓⟩`.

use nalgebra::{Matrix2, Matrix4, SMatrix};
use num_complex::Complex64;

/// Operator on the full 8-dimensional space.
pub type Op8 = SMatrix<Complex64, 8, 8>;
/// Operator on a single two-level system.
pub type Op2 = Matrix2<Complex64>;
/// Operator on the dark-spin pair.
pub type Op4 = Matrix4<Complex64>;

pub const DIM: usize = 8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity2() -> Op2 {
    Op2::identity()
}

pub fn sx() -> Op2 {
    Op2::new(ZERO, c(0.5), c(0.5), ZERO)
}

pub fn sy() -> Op2 {
    Op2::new(ZERO, Complex64::new(0.0, -0.5), Complex64::new(0.0, 0.5), ZERO)
}

pub fn sz() -> Op2 {
    Op2::new(c(0.5), ZERO, ZERO, c(-0.5))
}

/// Raising operator, `|↓⟩ → |↑⟩`.
pub fn s_plus() -> Op2 {
    Op2::new(ZERO, ONE, ZERO, ZERO)
}

pub fn s_minus() -> Op2 {
    Op2::new(ZERO, ZERO, ONE, ZERO)
}

/// Projector onto `|0⟩` of the NV.
pub fn nv_ground_projector() -> Op2 {
    Op2::new(ONE, ZERO, ZERO, ZERO)
}

/// Projector onto `|−1⟩` of the NV. This is the operator `S_z^NV + I/2`
/// of the cluster Hamiltonian.
pub fn nv_excited_projector() -> Op2 {
    Op2::new(ZERO, ZERO, ZERO, ONE)
}

/// In-plane spin operator `cos(φ) S_x + sin(φ) S_y`.
pub fn transverse(phase: f64) -> Op2 {
    sx() * c(phase.cos()) + sy() * c(phase.sin())
}

/// `a ⊗ b ⊗ c`.
pub fn kron3(a: &Op2, b: &Op2, c: &Op2) -> Op8 {
    let mut out = Op8::zeros();
    for i0 in 0..2 {
        for j0 in 0..2 {
            let x = a[(i0, j0)];
            if x == ZERO {
                continue;
            }
            for i1 in 0..2 {
                for j1 in 0..2 {
                    let y = x * b[(i1, j1)];
                    if y == ZERO {
                        continue;
                    }
                    for i2 in 0..2 {
                        for j2 in 0..2 {
                            out[(i0 * 4 + i1 * 2 + i2, j0 * 4 + j1 * 2 + j2)] = y * c[(i2, j2)];
                        }
                    }
                }
            }
        }
    }
    out
}

/// Operator acting on the NV only.
pub fn on_nv(a: &Op2) -> Op8 {
    kron3(a, &identity2(), &identity2())
}

/// Operator acting on dark spin 1 only.
pub fn on_ds1(a: &Op2) -> Op8 {
    kron3(&identity2(), a, &identity2())
}

/// Operator acting on dark spin 2 only.
pub fn on_ds2(a: &Op2) -> Op8 {
    kron3(&identity2(), &identity2(), a)
}

/// `nv ⊗ pair` for an operator on the dark-spin pair.
pub fn nv_times_pair(nv: &Op2, pair: &Op4) -> Op8 {
    let mut out = Op8::zeros();
    for a in 0..2 {
        for b in 0..2 {
            let x = nv[(a, b)];
            for i in 0..4 {
                for j in 0..4 {
                    out[(a * 4 + i, b * 4 + j)] = x * pair[(i, j)];
                }
            }
        }
    }
    out
}

/// Total dark-spin projection `S_z^(1) + S_z^(2)`.
pub fn total_dark_sz() -> Op8 {
    on_ds1(&sz()) + on_ds2(&sz())
}

/// Frobenius norm of `A B − B A`.
pub fn commutator_norm(a: &Op8, b: &Op8) -> f64 {
    (a * b - b * a).norm()
}

/// Frobenius norm of `U†U − I`.
pub fn unitarity_defect(u: &Op8) -> f64 {
    (u.adjoint() * u - Op8::identity()).norm()
}

/// Frobenius norm of `A − A†`.
pub fn hermiticity_defect(a: &Op8) -> f64 {
    (a - a.adjoint()).norm()
}

/// Transition matrix element `⟨m+1|S_x|m⟩` for spin quantum number `spin`.
///
/// Sets the Rabi frequency a resonant drive of amplitude γB₁ produces:
/// `Ω = 2 γB₁ |⟨m+1|S_x|m⟩|`.
pub fn sx_matrix_element(spin: f64, m: f64) -> f64 {
    0.5 * (spin * (spin + 1.0) - m * (m + 1.0)).sqrt()
}
