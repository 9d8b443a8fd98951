use serde::{Deserialize, Serialize};

use crate::error::SpinError;

/// Electron gyromagnetic ratio, MHz per gauss.
pub const GAMMA_E_MHZ_PER_G: f64 = 2.8024;

/// Vacuum permeability over 4π, T·m/A.
const MU0_OVER_4PI: f64 = 1.000_000_000_55e-7;
/// Planck constant, J·s.
const PLANCK: f64 = 6.626_070_15e-34;

/// `μ₀ h γ̄² / 4π` in MHz·nm³, where γ̄ = γ_e / 2π.
pub fn dipolar_prefactor_mhz_nm3() -> f64 {
    let gamma_hz_per_t = GAMMA_E_MHZ_PER_G * 1e6 * 1e4;
    // J·m³ → Hz·m³ → MHz·nm³
    MU0_OVER_4PI * PLANCK * gamma_hz_per_t * gamma_hz_per_t * 1e27 / 1e6
}

/// Hamiltonian parameters of the three-spin cluster.
///
/// Frequencies are in MHz, the field in gauss. `omega1`/`omega2` live in a
/// frame rotating at the dark-spin carrier unless an operation says
/// otherwise. The sign of `j12` enters only through `j12²` in every
/// spectroscopic observable and cannot be fixed experimentally.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    #[serde(rename = "a1_mhz")]
    pub a1: f64,
    #[serde(rename = "a2_mhz")]
    pub a2: f64,
    #[serde(rename = "j12_mhz")]
    pub j12: f64,
    #[serde(rename = "omega1_mhz")]
    pub omega1: f64,
    #[serde(rename = "omega2_mhz")]
    pub omega2: f64,
    #[serde(rename = "b0_gauss")]
    pub b0: f64,
}

impl ClusterParams {
    /// The cluster measured at 694 G.
    pub const REFERENCE: ClusterParams =
        ClusterParams { a1: 0.81, a2: -0.86, j12: 0.38, omega1: 0.14, omega2: 0.0, b0: 694.0 };

    pub fn new(a1: f64, a2: f64, j12: f64, omega1: f64, omega2: f64, b0: f64) -> Result<Self, SpinError> {
        let p = Self { a1, a2, j12, omega1, omega2, b0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SpinError> {
        let fields = [
            ("a1", self.a1),
            ("a2", self.a2),
            ("j12", self.j12),
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("b0", self.b0),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(SpinError::NonFiniteParam(name));
            }
        }
        Ok(())
    }

    /// Parameters with every coupling and Zeeman offset set to zero.
    pub fn uncoupled() -> Self {
        Self { a1: 0.0, a2: 0.0, j12: 0.0, omega1: 0.0, omega2: 0.0, b0: 0.0 }
    }

    /// Same cluster with `j12 → −j12`.
    pub fn with_flipped_j(&self) -> Self {
        Self { j12: -self.j12, ..*self }
    }

    pub fn j12_sign_determined(&self) -> bool {
        false
    }
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self::REFERENCE
    }
}

/// Relative position of two spins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinGeometry {
    /// Separation in nanometres.
    pub r: f64,
    /// Polar angle from the quantization axis, radians.
    pub theta: f64,
}

impl SpinGeometry {
    pub fn new(r: f64, theta: f64) -> Result<Self, SpinError> {
        let g = Self { r, theta };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), SpinError> {
        if !self.r.is_finite() || self.r <= 0.0 {
            return Err(SpinError::SingularGeometry(self.r));
        }
        if !(0.0..=std::f64::consts::PI).contains(&self.theta) {
            return Err(SpinError::AngleOutOfRange(self.theta));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    NvToDark,
    DarkToDark,
}

/// Secular dipolar coupling constant in MHz.
///
/// `NvToDark` gives `A = +P (3cos²θ − 1)/r³` and `DarkToDark` gives
/// `J₁₂ = −P (3cos²θ − 1)/(2 r³)`, with `P` from [`dipolar_prefactor_mhz_nm3`].
pub fn dipolar_coupling(geom: SpinGeometry, kind: CouplingKind) -> Result<f64, SpinError> {
    geom.validate()?;
    let c = geom.theta.cos();
    let strength = dipolar_prefactor_mhz_nm3() * (3.0 * c * c - 1.0) / geom.r.powi(3);
    Ok(match kind {
        CouplingKind::NvToDark => strength,
        CouplingKind::DarkToDark => -0.5 * strength,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefactor_matches_hand_calculation() {
        // 1e-7 * 6.62607e-34 * (2.8024e10)^2 = 5.2037e-20 J m^3 / (J s) -> Hz m^3
        let hand = 1e-7 * 6.62607015e-34 * 2.8024e10 * 2.8024e10 * 1e27 / 1e6;
        assert!((dipolar_prefactor_mhz_nm3() - hand).abs() < 1e-6);
        assert!((dipolar_prefactor_mhz_nm3() - 52.04).abs() < 0.005);
    }

    #[test]
    fn on_axis_one_nanometre() {
        let g = SpinGeometry::new(1.0, 0.0).unwrap();
        let a = dipolar_coupling(g, CouplingKind::NvToDark).unwrap();
        assert!((a - 104.07).abs() < 0.02, "{a}");
        let j = dipolar_coupling(g, CouplingKind::DarkToDark).unwrap();
        assert!((j + a / 2.0).abs() < 1e-12);
    }

    #[test]
    fn magic_angle_vanishes() {
        let theta = (1.0f64 / 3.0).sqrt().acos();
        let g = SpinGeometry::new(3.7, theta).unwrap();
        assert!(dipolar_coupling(g, CouplingKind::NvToDark).unwrap().abs() < 1e-12);
    }

    #[test]
    fn cubic_distance_scaling() {
        let a1 = dipolar_coupling(SpinGeometry::new(2.0, 0.0).unwrap(), CouplingKind::NvToDark).unwrap();
        let a2 = dipolar_coupling(SpinGeometry::new(4.0, 0.0).unwrap(), CouplingKind::NvToDark).unwrap();
        assert!((a1 / a2 - 8.0).abs() < 1e-12);
    }

    #[test]
    fn zero_distance_is_singular() {
        assert!(matches!(
            dipolar_coupling(SpinGeometry { r: 0.0, theta: 0.0 }, CouplingKind::NvToDark),
            Err(SpinError::SingularGeometry(_))
        ));
    }

    #[test]
    fn json_keys() {
        let s = serde_json::to_string(&ClusterParams::REFERENCE).unwrap();
        for key in ["a1_mhz", "a2_mhz", "j12_mhz", "omega1_mhz", "omega2_mhz", "b0_gauss"] {
            assert!(s.contains(key), "{s}");
        }
        let back: ClusterParams = serde_json::from_str(&s).unwrap();
        assert_eq!(back, ClusterParams::REFERENCE);
    }

    #[test]
    fn non_finite_rejected() {
        assert!(ClusterParams::new(f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0).is_err());
    }
}
