use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::AnalysisError;
use crate::signal::Signal;

/// Adds i.i.d. Gaussian noise of standard deviation `sigma`, reproducible per seed.
pub fn inject_noise(signal: &Signal, sigma: f64, seed: u64) -> Result<Signal, AnalysisError> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(AnalysisError::InvalidArgument(format!("sigma {sigma} must be finite and ≥ 0")));
    }
    if sigma == 0.0 {
        return Ok(signal.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| AnalysisError::InvalidArgument(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = signal.values.iter().map(|v| v + normal.sample(&mut rng)).collect();
    Ok(signal.with_values(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{linspace, Meta};

    fn flat(n: usize) -> Signal {
        Signal::new(linspace(0.0, 1.0, n), vec![0.25; n], Meta::default()).unwrap()
    }

    #[test]
    fn zero_sigma_is_identity() {
        let s = flat(10);
        assert_eq!(inject_noise(&s, 0.0, 7).unwrap(), s);
    }

    #[test]
    fn reproducible_per_seed() {
        let s = flat(100);
        assert_eq!(inject_noise(&s, 0.1, 42).unwrap(), inject_noise(&s, 0.1, 42).unwrap());
        assert_ne!(inject_noise(&s, 0.1, 42).unwrap(), inject_noise(&s, 0.1, 43).unwrap());
    }

    #[test]
    fn sample_variance() {
        let n = 20_000;
        let s = flat(n);
        let noisy = inject_noise(&s, 0.05, 1).unwrap();
        let d: Vec<f64> = noisy.values.iter().zip(&s.values).map(|(a, b)| a - b).collect();
        let mean = d.iter().sum::<f64>() / n as f64;
        let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var / 0.0025 - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn negative_sigma_rejected() {
        assert!(inject_noise(&flat(3), -1.0, 0).is_err());
    }
}
