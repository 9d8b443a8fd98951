//! Closed-form SEDOR frequencies and amplitudes, ESR splittings, pulse-error
//! leakage and the inversion from measured frequencies back to couplings.
//!
//! Nothing here evolves a state; the simulators in [`crate::experiments`]
//! serve as the independent check.

use serde::{Deserialize, Serialize};

use crate::error::AnalyticError;
use crate::spin::ClusterParams;

/// The four SEDOR frequencies in MHz. Signal components appear at half these values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SedorFrequencies {
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub delta4: f64,
}

pub fn sedor_frequencies(params: &ClusterParams) -> SedorFrequencies {
    let d = params.omega1 - params.omega2;
    let d1 = params.a1 - params.a2 + d;
    let delta1 = params.j12.hypot(d);
    let delta2 = d1.hypot(params.j12);
    SedorFrequencies { delta1, delta2, delta3: delta2 - delta1, delta4: params.a1 + params.a2 }
}

/// One value per SEDOR signal component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Components {
    pub dc: f64,
    /// At Δ₁/2.
    pub half_delta1: f64,
    /// At Δ₂/2.
    pub half_delta2: f64,
    /// At Δ₃/2 = (Δ₂ − Δ₁)/2.
    pub half_delta3: f64,
    /// At (Δ₁ + Δ₂)/2.
    pub half_sum: f64,
    /// At |Δ₄|/2, from the |↑↑⟩, |↓↓⟩ sector.
    pub half_delta4: f64,
}

impl Components {
    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            dc: f(self.dc),
            half_delta1: f(self.half_delta1),
            half_delta2: f(self.half_delta2),
            half_delta3: f(self.half_delta3),
            half_sum: f(self.half_sum),
            half_delta4: f(self.half_delta4),
        }
    }
}

/// Closed-form description of the ideal-pulse SEDOR signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SedorModel {
    pub frequencies: SedorFrequencies,
    /// `ω₁ − ω₂`.
    pub delta: f64,
    /// `A₁ − A₂ + δ`.
    pub delta1_sym: f64,
    /// `δ²δ₁² + δ²J² + δ₁²J² + J⁴`.
    pub gamma: f64,
    /// Signed coefficient of each cosine in the symmetrized contrast.
    pub raw: Components,
    /// Magnitudes relative to the Δ₁/2 component.
    pub normalized: Components,
}

impl SedorModel {
    pub fn new(params: &ClusterParams) -> Result<Self, AnalyticError> {
        let frequencies = sedor_frequencies(params);
        let (big1, big2) = (frequencies.delta1, frequencies.delta2);
        if big1 * big2 == 0.0 {
            return Err(AnalyticError::DegenerateSpectrum);
        }
        let j2 = params.j12 * params.j12;
        let d = params.omega1 - params.omega2;
        let d1 = params.a1 - params.a2 + d;
        let gamma = d * d * d1 * d1 + d * d * j2 + d1 * d1 * j2 + j2 * j2;

        // Single-excitation sector: with NV in |0⟩ (|−1⟩) the flip-flop pair
        // rotates about (−J, 0, δ) ((−J, 0, δ₁)). The echo overlap expands into
        // cosines at Δ₁/2, Δ₂/2 and their sum and difference.
        let p = (j2 - d * d) / (big1 * big1);
        let q = (j2 - d1 * d1) / (big2 * big2);
        let g = gamma / (big1 * big1 * big2 * big2);
        let r = d * d1 / (big1 * big2);
        let raw = Components {
            dc: -(1.0 + p + q + g) / 8.0,
            half_delta1: -(1.0 - p + q - g) / 8.0,
            half_delta2: -(1.0 + p - q - g) / 8.0,
            half_delta3: -((1.0 - p - q + g) / 16.0 + r / 4.0),
            half_sum: -((1.0 - p - q + g) / 16.0 - r / 4.0),
            half_delta4: -0.5,
        };
        let norm = raw.half_delta1.abs();
        let normalized = if norm > 0.0 { raw.map(|x| x.abs() / norm) } else { raw.map(|_| f64::NAN) };
        Ok(Self { frequencies, delta: d, delta1_sym: d1, gamma, raw, normalized })
    }

    /// Predicted symmetrized contrast at echo time `tau` (µs), ideal pulses,
    /// no TPPI, unpolarized dark spins.
    pub fn contrast(&self, tau: f64) -> f64 {
        let c = |f: f64| (std::f64::consts::TAU * f * tau).cos();
        let f = &self.frequencies;
        let a = &self.raw;
        a.dc + a.half_delta1 * c(f.delta1 / 2.0)
            + a.half_delta2 * c(f.delta2 / 2.0)
            + a.half_delta3 * c(f.delta3 / 2.0)
            + a.half_sum * c((f.delta1 + f.delta2) / 2.0)
            + a.half_delta4 * c(f.delta4 / 2.0)
    }

    /// `(frequency, signed amplitude)` for every component, DC first.
    pub fn lines(&self) -> [(f64, f64); 6] {
        let f = &self.frequencies;
        let a = &self.raw;
        [
            (0.0, a.dc),
            (f.delta1 / 2.0, a.half_delta1),
            (f.delta2 / 2.0, a.half_delta2),
            (f.delta3 / 2.0, a.half_delta3),
            ((f.delta1 + f.delta2) / 2.0, a.half_sum),
            (f.delta4.abs() / 2.0, a.half_delta4),
        ]
    }
}

pub fn sedor_amplitudes(params: &ClusterParams) -> Result<SedorModel, AnalyticError> {
    SedorModel::new(params)
}

/// `((A₁ − A₂)/2, (A₁ + A₂)/2)`: NV line offsets from the flip-flop and the
/// aligned dark-spin subspaces.
pub fn esr_splittings(params: &ClusterParams) -> (f64, f64) {
    ((params.a1 - params.a2) / 2.0, (params.a1 + params.a2) / 2.0)
}

/// Fraction `δ²/(Ω² + δ²)` of NV coherence left unmodulated by a detuned
/// dark-spin π pulse.
pub fn pulse_error_dc(delta: f64, rabi: f64) -> Result<f64, AnalyticError> {
    let denom = rabi * rabi + delta * delta;
    if denom == 0.0 {
        return Err(AnalyticError::ZeroDrive);
    }
    Ok(delta * delta / denom)
}

/// Couplings recovered from SEDOR frequencies and the NV ESR splitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractedParams {
    pub j12: f64,
    /// `ω₁ − ω₂`.
    pub delta: f64,
    /// `A₁ − A₂`. Negative when the spin labels had to be exchanged to keep `δ ≥ 0`.
    pub a_diff: f64,
    /// Midpoint estimate `A₁ = (A₁ − A₂)/2` with `A₁ + A₂ = 0`.
    pub a1: f64,
    pub a2: f64,
    /// Half-width on A₁ and A₂ from the `|A₁ + A₂|` bound.
    pub a_individual_uncertainty: f64,
    /// Solutions with a different sign of δ, J or A₁ − A₂ that were dropped.
    pub discarded_branches: usize,
}

/// Inverts `Δ₁² = J² + δ²`, `Δ₂² = J² + (A₁ − A₂ + δ)²`.
///
/// Keeps the branch with `δ ≥ 0` and `J ≥ 0`. `delta4_bound` caps `|A₁ + A₂|`.
pub fn extract_cluster_params(
    delta1: f64,
    delta2: f64,
    esr_full_splitting: f64,
    delta4_bound: f64,
) -> Result<ExtractedParams, AnalyticError> {
    if !(delta1 > 0.0) || !(delta2 > delta1) {
        return Err(AnalyticError::InvalidInput(format!("need Δ₂ > Δ₁ > 0, got Δ₁ = {delta1}, Δ₂ = {delta2}")));
    }
    if !(esr_full_splitting > 0.0) {
        return Err(AnalyticError::InvalidInput(format!("ESR splitting {esr_full_splitting} must be > 0")));
    }
    if !(delta4_bound >= 0.0) {
        return Err(AnalyticError::InvalidInput(format!("Δ₄ bound {delta4_bound} must be ≥ 0")));
    }
    let mut branches: Vec<(f64, f64, f64)> = Vec::new();
    for s in [esr_full_splitting, -esr_full_splitting] {
        let d = ((delta2 * delta2 - delta1 * delta1) / s - s) / 2.0;
        let j2 = delta1 * delta1 - d * d;
        if j2 < 0.0 {
            continue;
        }
        let j = j2.sqrt();
        for jj in [j, -j] {
            if !branches.contains(&(s, d, jj)) {
                branches.push((s, d, jj));
            }
        }
    }
    if branches.is_empty() {
        return Err(AnalyticError::NoRealSolution(format!(
            "Δ₁² < δ² for Δ₁ = {delta1}, Δ₂ = {delta2}, A₁ − A₂ = {esr_full_splitting}"
        )));
    }
    let kept = branches
        .iter()
        .copied()
        .filter(|&(_, d, j)| d >= 0.0 && j >= 0.0)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or_else(|| AnalyticError::NoRealSolution("no branch with δ ≥ 0 and J ≥ 0".into()))?;
    let (s, delta, j12) = kept;
    Ok(ExtractedParams {
        j12,
        delta,
        a_diff: s,
        a1: s / 2.0,
        a2: -s / 2.0,
        a_individual_uncertainty: delta4_bound / 2.0,
        discarded_branches: branches.len() - 1,
    })
}

/// Linearized 95% half-widths of `(J, δ)` for independent input errors on
/// `Δ₁`, `Δ₂` and `A₁ − A₂`.
pub fn extraction_uncertainty(extracted: &ExtractedParams, delta1: f64, delta2: f64, ci: [f64; 3]) -> (f64, f64) {
    let s = extracted.a_diff;
    let d = extracted.delta;
    let j = extracted.j12;
    // ∂δ/∂(Δ₁, Δ₂, s)
    let dd = [-delta1 / s, delta2 / s, -(delta2 * delta2 - delta1 * delta1) / (2.0 * s * s) - 0.5];
    // ∂J/∂x = (Δ₁ ∂Δ₁/∂x − δ ∂δ/∂x)/J
    let dj = if j > 0.0 { [(delta1 - d * dd[0]) / j, -d * dd[1] / j, -d * dd[2] / j] } else { [f64::INFINITY; 3] };
    let quad = |g: [f64; 3]| {
        g.iter().zip(ci.iter()).map(|(a, b)| if *b == 0.0 { 0.0 } else { (a * b).powi(2) }).sum::<f64>().sqrt()
    };
    (quad(dj), quad(dd))
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: ClusterParams = ClusterParams::REFERENCE;

    #[test]
    fn reference_frequencies() {
        let f = sedor_frequencies(&P);
        assert!((f.delta1 - 0.405).abs() < 1e-3);
        assert!((f.delta2 - 1.849).abs() < 1e-3);
        assert!((f.delta3 - 1.444).abs() < 1e-3);
        assert!((f.delta4 + 0.05).abs() < 1e-12);
        assert_eq!(f.delta3, f.delta2 - f.delta1);
    }

    #[test]
    fn degenerate_limits() {
        let f = sedor_frequencies(&ClusterParams { j12: 0.0, omega1: 0.0, ..P });
        assert_eq!(f.delta1, 0.0);
        let g = sedor_frequencies(&ClusterParams { a1: 0.3, a2: 0.3, ..P });
        assert!((g.delta2 - g.delta1).abs() < 1e-15 && g.delta3.abs() < 1e-15);
        assert_eq!(
            SedorModel::new(&ClusterParams { j12: 0.0, omega1: 0.0, ..P }),
            Err(AnalyticError::DegenerateSpectrum)
        );
    }

    #[test]
    fn gamma_identity() {
        let m = SedorModel::new(&P).unwrap();
        let f = m.frequencies;
        let rhs = f.delta1.powi(2) * f.delta2.powi(2);
        assert!((m.gamma - rhs).abs() < 1e-12 * rhs);
    }

    #[test]
    fn reference_amplitudes() {
        let m = SedorModel::new(&P).unwrap();
        assert!((m.raw.dc + 0.23068).abs() < 1e-4);
        assert!((m.raw.half_delta1 - 0.20957).abs() < 1e-5);
        assert!((m.raw.half_delta2 + 0.20957).abs() < 1e-5);
        assert!((m.raw.half_delta3 + 0.21924).abs() < 1e-5);
        assert!((m.raw.half_sum + 0.05008).abs() < 1e-5);
        assert!((m.normalized.half_delta2 - 1.0).abs() < 1e-12);
        assert!((m.normalized.half_delta3 - 1.046).abs() < 1e-3);
        assert!((m.normalized.dc - 1.10).abs() < 5e-3);
    }

    #[test]
    fn printed_forms_differ_by_sign_of_one_term() {
        // The alternative tabulation writes the Δ₁/2 and DC amplitudes with
        // Δ₂²(J² − δ²) where the expansion gives Δ₂²(δ² − J²); with that term
        // flipped and a factor 2 the two agree.
        let m = SedorModel::new(&P).unwrap();
        let (j2, d, d1) = (P.j12 * P.j12, m.delta, m.delta1_sym);
        let (b1, b2) = (m.frequencies.delta1.powi(2), m.frequencies.delta2.powi(2));
        let g = m.gamma;
        let printed_h1 = (b2 * (j2 - d * d) - g + b1 * (j2 - d1 * d1) + b1 * b2) / (b1 * b2);
        let flipped_h1 = (b2 * (d * d - j2) - g + b1 * (j2 - d1 * d1) + b1 * b2) / (b1 * b2);
        assert!((printed_h1.abs() / 2.0 - m.raw.half_delta1.abs() * 4.0 / 2.0).abs() > 0.1);
        assert!((flipped_h1.abs() - 8.0 * m.raw.half_delta1.abs()).abs() < 1e-12);
        let h3 = (b2 * (d * d - j2) + g + b1 * b2 + b1 * (d1 * d1 - j2) + 4.0 * d * d1 * b1.sqrt() * b2.sqrt())
            / (2.0 * b1 * b2);
        assert!((h3.abs() - 8.0 * m.raw.half_delta3.abs()).abs() < 1e-12);
    }

    #[test]
    fn sum_component_suppressed_for_same_sign() {
        let m = SedorModel::new(&P).unwrap();
        assert!(m.delta * m.delta1_sym > 0.0);
        assert!(m.raw.half_sum.abs() < m.raw.half_delta3.abs());
        let flipped = SedorModel::new(&ClusterParams { omega1: -0.14, a1: 0.3, a2: -0.2, ..P }).unwrap();
        assert!(flipped.delta * flipped.delta1_sym < 0.0);
        assert!(flipped.raw.half_sum.abs() > flipped.raw.half_delta3.abs());
    }

    #[test]
    fn uncoupled_limit_of_model() {
        // with all couplings but J gone, the echo contrast is −1 at τ = 0
        let m = SedorModel::new(&P).unwrap();
        assert!((m.contrast(0.0) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn splittings() {
        let (o, i) = esr_splittings(&P);
        assert!((o - 0.835).abs() < 1e-12 && (i + 0.025).abs() < 1e-12);
        assert_eq!(esr_splittings(&ClusterParams { a1: 0.4, a2: 0.4, ..P }), (0.0, 0.4));
        assert_eq!(esr_splittings(&ClusterParams { a1: 0.4, a2: 0.0, ..P }), (0.2, 0.2));
    }

    #[test]
    fn pulse_error_values() {
        assert!((pulse_error_dc(1.0, 13.0).unwrap() - 0.0059).abs() < 5e-5);
        assert_eq!(pulse_error_dc(0.0, 13.0).unwrap(), 0.0);
        assert_eq!(pulse_error_dc(2.0, 0.0).unwrap(), 1.0);
        assert_eq!(pulse_error_dc(0.0, 0.0), Err(AnalyticError::ZeroDrive));
    }

    #[test]
    fn extract_reference_numbers() {
        let e = extract_cluster_params(0.41, 1.85, 1.67, 0.10).unwrap();
        assert!((e.delta - 0.14).abs() < 0.01, "{e:?}");
        assert!((e.j12 - 0.38).abs() < 0.01, "{e:?}");
        assert_eq!(e.a_diff, 1.67);
        assert_eq!(e.a_individual_uncertainty, 0.05);
        assert_eq!(e.discarded_branches, 3);
    }

    #[test]
    fn extract_rejects_bad_inputs() {
        assert!(extract_cluster_params(0.41, 0.41, 1.67, 0.1).is_err());
        assert!(matches!(extract_cluster_params(0.1, 3.0, 0.5, 0.1), Err(AnalyticError::NoRealSolution(_))));
    }

    #[test]
    fn uncertainty_matches_finite_differences() {
        let (d1, d2, s) = (0.41, 1.85, 1.67);
        let e = extract_cluster_params(d1, d2, s, 0.1).unwrap();
        let h = 1e-6;
        let eps = [1e-3, 2e-3, 3e-3];
        let (cj, cd) = extraction_uncertainty(&e, d1, d2, eps);
        let mut gj = 0.0;
        let mut gd = 0.0;
        for k in 0..3 {
            let mut x = [d1, d2, s];
            x[k] += h;
            let f = extract_cluster_params(x[0], x[1], x[2], 0.1).unwrap();
            gj += ((f.j12 - e.j12) / h * eps[k]).powi(2);
            gd += ((f.delta - e.delta) / h * eps[k]).powi(2);
        }
        assert!((cj - gj.sqrt()).abs() < 1e-6 * cj.max(1e-9) + 1e-9);
        assert!((cd - gd.sqrt()).abs() < 1e-6 * cd.max(1e-9) + 1e-9);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn params() -> impl Strategy<Value = ClusterParams> {
            (-2.0..2.0f64, -2.0..2.0f64, 0.05..1.0f64, -1.0..1.0f64, -1.0..1.0f64, prop::bool::ANY).prop_map(
                |(a1, a2, j, omega1, omega2, neg)| ClusterParams {
                    a1,
                    a2,
                    j12: if neg { -j } else { j },
                    omega1,
                    omega2,
                    b0: 0.0,
                },
            )
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(256))]

            #[test]
            fn gamma_identity_holds(p in params()) {
                let m = SedorModel::new(&p).unwrap();
                let rhs = m.frequencies.delta1.powi(2) * m.frequencies.delta2.powi(2);
                prop_assert!((m.gamma - rhs).abs() <= 1e-12 * rhs.max(1e-300));
                prop_assert!(m.frequencies.delta1 >= 0.0 && m.frequencies.delta2 >= 0.0);
                prop_assert_eq!(m.frequencies.delta3, m.frequencies.delta2 - m.frequencies.delta1);
            }

            #[test]
            fn frequencies_invariant(p in params(), shift in -5.0..5.0f64) {
                let f = sedor_frequencies(&p);
                prop_assert_eq!(f, sedor_frequencies(&p.with_flipped_j()));
                let s = sedor_frequencies(&ClusterParams { omega1: p.omega1 + shift, omega2: p.omega2 + shift, ..p });
                prop_assert!((s.delta1 - f.delta1).abs() < 1e-12);
                prop_assert!((s.delta2 - f.delta2).abs() < 1e-12);
            }

            #[test]
            fn delta2_amplitude_matches_delta1(p in params()) {
                let m = SedorModel::new(&p).unwrap();
                prop_assert!((m.raw.half_delta1.abs() - m.raw.half_delta2.abs()).abs() < 1e-12);
            }

            #[test]
            fn extraction_round_trip(p in params()) {
                let f = sedor_frequencies(&p);
                let (outer, _) = esr_splittings(&p);
                prop_assume!(f.delta2 > f.delta1 + 1e-6 && f.delta1 > 1e-6 && outer.abs() > 1e-3);
                let e = extract_cluster_params(f.delta1, f.delta2, 2.0 * outer.abs(), 0.1).unwrap();
                let d = p.omega1 - p.omega2;
                // the kept branch is the one with δ ≥ 0; relabelling the spins maps the rest onto it
                prop_assert!((e.j12 - p.j12.abs()).abs() < 1e-8);
                let s = p.a1 - p.a2;
                let same = (e.delta - d).abs() < 1e-8 && (e.a_diff - s).abs() < 1e-12;
                let swapped = (e.delta + d).abs() < 1e-8 && (e.a_diff + s).abs() < 1e-12;
                prop_assert!(same || swapped, "{:?} vs δ {} s {}", e, d, s);
            }

            #[test]
            fn pulse_error_monotone(d in 0.01..5.0f64, r in 0.1..20.0f64, k in 1.01..3.0f64) {
                let base = pulse_error_dc(d, r).unwrap();
                prop_assert!(pulse_error_dc(d * k, r).unwrap() > base);
                prop_assert!(pulse_error_dc(d, r * k).unwrap() < base);
            }
        }
    }
}
