//! Levenberg–Marquardt least squares with covariance-based confidence intervals.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Residual model `r(p)` with an analytic Jacobian `∂rᵢ/∂pⱼ`.
pub trait LeastSquares {
    fn n_residuals(&self) -> usize;
    fn residuals(&self, p: &[f64], out: &mut [f64]);
    /// Row-major `n_residuals × p.len()` Jacobian.
    fn jacobian(&self, p: &[f64], out: &mut DMatrix<f64>);
}

#[derive(Debug, Clone, Copy)]
pub struct LmConfig {
    pub max_iterations: usize,
    /// Stop when every relative parameter step falls below this.
    pub step_tol: f64,
    /// Stop when the relative cost decrease falls below this.
    pub cost_tol: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self { max_iterations: 500, step_tol: 1e-12, cost_tol: 1e-15 }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// `s² (JᵀJ)⁻¹` at the solution, `s² = SSR/(m − n)`.
    pub covariance: DMatrix<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub dof: usize,
}

impl LmOutcome {
    /// Two-sided 95% half-widths from the Student-t quantile.
    pub fn ci95(&self) -> Vec<f64> {
        let t = t_quantile_975(self.dof);
        (0..self.params.len()).map(|k| t * self.covariance[(k, k)].max(0.0).sqrt()).collect()
    }

    /// 95% half-width of a scalar function of the parameters with gradient `grad`.
    pub fn ci95_of(&self, grad: &[f64]) -> f64 {
        let g = DVector::from_column_slice(grad);
        let var = (g.transpose() * &self.covariance * &g)[(0, 0)];
        t_quantile_975(self.dof) * var.max(0.0).sqrt()
    }
}

pub fn t_quantile_975(dof: usize) -> f64 {
    if dof == 0 {
        return f64::INFINITY;
    }
    StudentsT::new(0.0, 1.0, dof as f64).map(|d| d.inverse_cdf(0.975)).unwrap_or(f64::INFINITY)
}

fn cost(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

pub fn levenberg_marquardt<M: LeastSquares>(model: &M, init: &[f64], config: &LmConfig) -> LmOutcome {
    let m = model.n_residuals();
    let n = init.len();
    let mut p = init.to_vec();
    let mut r = vec![0.0; m];
    let mut trial_r = vec![0.0; m];
    let mut jac = DMatrix::zeros(m, n);
    model.residuals(&p, &mut r);
    let mut c = cost(&r);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iterations {
        iterations += 1;
        model.jacobian(&p, &mut jac);
        let jtj = jac.transpose() * &jac;
        let rv = DVector::from_column_slice(&r);
        let g = jac.transpose() * rv;
        let mut improved = false;
        let mut small_step = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let step = match a.clone().cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => match a.lu().solve(&(-&g)) {
                    Some(s) => s,
                    None => {
                        lambda *= 10.0;
                        continue;
                    }
                },
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            model.residuals(&trial, &mut trial_r);
            let tc = cost(&trial_r);
            if tc.is_finite() && tc <= c {
                small_step = step.iter().zip(&p).all(|(s, x)| s.abs() <= config.step_tol * (x.abs() + config.step_tol));
                let rel = (c - tc) / c.max(f64::MIN_POSITIVE);
                p = trial;
                std::mem::swap(&mut r, &mut trial_r);
                c = tc;
                lambda = (lambda / 3.0).max(1e-15);
                improved = true;
                if rel < config.cost_tol {
                    small_step = true;
                }
                break;
            }
            lambda *= 4.0;
            if lambda > 1e16 {
                break;
            }
        }
        if !improved || small_step || c == 0.0 {
            // no downhill step exists at any damping: a (local) minimum
            converged = c.is_finite();
            break;
        }
    }

    model.jacobian(&p, &mut jac);
    let dof = m.saturating_sub(n);
    let s2 = if dof > 0 { c / dof as f64 } else { f64::NAN };
    let jtj = jac.transpose() * &jac;
    let inv = jtj
        .clone()
        .pseudo_inverse(1e-14 * jtj.amax().max(f64::MIN_POSITIVE))
        .unwrap_or_else(|_| DMatrix::from_element(n, n, f64::INFINITY));
    LmOutcome { params: p, covariance: inv * s2, residual_norm: c.sqrt(), iterations, converged, dof }
}

/// Largest relative disagreement between the analytic Jacobian and central
/// differences at `p`.
pub fn jacobian_check<M: LeastSquares>(model: &M, p: &[f64]) -> f64 {
    let m = model.n_residuals();
    let n = p.len();
    let mut analytic = DMatrix::zeros(m, n);
    model.jacobian(p, &mut analytic);
    let mut plus = vec![0.0; m];
    let mut minus = vec![0.0; m];
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let h = 1e-6 * p[j].abs().max(1e-3);
        let mut q = p.to_vec();
        q[j] = p[j] + h;
        model.residuals(&q, &mut plus);
        q[j] = p[j] - h;
        model.residuals(&q, &mut minus);
        let scale = (0..m).map(|i| analytic[(i, j)].abs()).fold(0.0, f64::max).max(1e-12);
        for i in 0..m {
            let fd = (plus[i] - minus[i]) / (2.0 * h);
            worst = worst.max((fd - analytic[(i, j)]).abs() / scale);
        }
    }
    worst
}

/// Estimate with a 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// `null` in JSON when unbounded.
    #[serde(with = "unbounded_as_null")]
    pub ci95: f64,
}

mod unbounded_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Named estimates plus solver diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: BTreeMap<String, Estimate>,
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<Estimate> {
        self.params.get(name).copied()
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).map(|e| e.value)
    }

    pub(crate) fn insert(&mut self, name: impl Into<String>, value: f64, ci95: f64) {
        let ci95 = if ci95.is_nan() { f64::INFINITY } else { ci95.abs() };
        self.params.insert(name.into(), Estimate { value, ci95 });
    }

    pub(crate) fn from_outcome(o: &LmOutcome) -> Self {
        Self { params: BTreeMap::new(), residual: o.residual_norm, converged: o.converged, iterations: o.iterations }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Exponential {
        t: Vec<f64>,
        y: Vec<f64>,
    }

    impl LeastSquares for Exponential {
        fn n_residuals(&self) -> usize {
            self.t.len()
        }
        fn residuals(&self, p: &[f64], out: &mut [f64]) {
            for (k, t) in self.t.iter().enumerate() {
                out[k] = p[0] * (-p[1] * t).exp() - self.y[k];
            }
        }
        fn jacobian(&self, p: &[f64], out: &mut DMatrix<f64>) {
            for (k, t) in self.t.iter().enumerate() {
                let e = (-p[1] * t).exp();
                out[(k, 0)] = e;
                out[(k, 1)] = -p[0] * t * e;
            }
        }
    }

    #[test]
    fn recovers_exponential() {
        let t: Vec<f64> = (0..50).map(|k| k as f64 * 0.1).collect();
        let y = t.iter().map(|t| 2.5 * (-0.7 * t).exp()).collect();
        let model = Exponential { t, y };
        assert!(jacobian_check(&model, &[1.0, 0.3]) < 1e-5);
        let out = levenberg_marquardt(&model, &[1.0, 0.1], &LmConfig::default());
        assert!(out.converged);
        assert!((out.params[0] - 2.5).abs() < 1e-8);
        assert!((out.params[1] - 0.7).abs() < 1e-8);
    }

    #[test]
    fn t_quantiles() {
        assert!((t_quantile_975(10) - 2.228).abs() < 1e-3);
        assert!((t_quantile_975(100000) - 1.960).abs() < 1e-3);
        assert!(t_quantile_975(0).is_infinite());
    }

    #[test]
    fn fit_result_json() {
        let mut f = FitResult { params: BTreeMap::new(), residual: 0.1, converged: true, iterations: 3 };
        f.insert("f1", 0.2, 0.01);
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains(r#""params":{"f1":{"value":0.2,"ci95":0.01}}"#), "{s}");
        assert!(s.contains(r#""converged":true"#));
        f.insert("f2", 1.0, f64::NAN);
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains(r#""f2":{"value":1.0,"ci95":null}"#), "{s}");
        let back: FitResult = serde_json::from_str(&s).unwrap();
        assert!(back.get("f2").unwrap().ci95.is_infinite());
    }
}
