use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};

use super::fft::{compute_fft, Window};
use super::lm::{levenberg_marquardt, FitResult, LeastSquares, LmConfig};
use super::peaks::local_maxima;
use crate::error::AnalysisError;
use crate::signal::Signal;

/// Cosine and sine coefficients of one frequency component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub freq: f64,
    pub cos: f64,
    pub sin: f64,
}

impl Quadrature {
    pub fn amplitude(&self) -> f64 {
        self.cos.hypot(self.sin)
    }
}

/// Linear least-squares projection of `signal` onto `cos`/`sin` at fixed
/// frequencies plus a constant. A frequency of zero contributes only its
/// cosine term, which then absorbs the constant.
pub fn linear_components(signal: &Signal, freqs: &[f64]) -> Result<(Vec<Quadrature>, f64), AnalysisError> {
    let m = signal.len();
    let has_zero = freqs.contains(&0.0);
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut layout = Vec::new();
    for (k, &f) in freqs.iter().enumerate() {
        cols.push(signal.times.iter().map(|t| (TAU * f * t).cos()).collect());
        layout.push((k, false));
        if f != 0.0 {
            cols.push(signal.times.iter().map(|t| (TAU * f * t).sin()).collect());
            layout.push((k, true));
        }
    }
    if !has_zero {
        cols.push(vec![1.0; m]);
    }
    let n = cols.len();
    if m < n {
        return Err(AnalysisError::InvalidArgument(format!("{m} samples for {n} unknowns")));
    }
    let a = DMatrix::from_fn(m, n, |i, j| cols[j][i]);
    let b = DVector::from_column_slice(&signal.values);
    let x = a.svd(true, true).solve(&b, 1e-12).map_err(|_| AnalysisError::Singular)?;
    let mut out: Vec<Quadrature> = freqs.iter().map(|&freq| Quadrature { freq, cos: 0.0, sin: 0.0 }).collect();
    for (j, &(k, is_sin)) in layout.iter().enumerate() {
        if is_sin {
            out[k].sin = x[j];
        } else {
            out[k].cos = x[j];
        }
    }
    let offset = if has_zero { 0.0 } else { x[n - 1] };
    Ok((out, offset))
}

/// `Σ (cₖ cos 2πfₖt + sₖ sin 2πfₖt) E(t) + b` with `E = exp(−(t/T₂)^p)`.
///
/// Parameter layout: `[f, c, s]` per component, then `ln T₂` and `p` when
/// decaying, then `b` when a constant is present.
pub struct SineModel<'a> {
    pub times: &'a [f64],
    pub values: &'a [f64],
    pub n_sines: usize,
    pub decay: bool,
    pub constant: bool,
}

impl SineModel<'_> {
    fn envelope(&self, p: &[f64], t: f64) -> (f64, f64, f64) {
        if !self.decay {
            return (1.0, 0.0, 0.0);
        }
        let ln_t2 = p[3 * self.n_sines];
        let power = p[3 * self.n_sines + 1];
        let x = t.abs() * (-ln_t2).exp();
        if x == 0.0 {
            return (1.0, 0.0, 0.0);
        }
        let xp = x.powf(power);
        let e = (-xp).exp();
        // ∂E/∂lnT₂, ∂E/∂p
        (e, e * power * xp, -e * xp * x.ln())
    }

    pub fn evaluate(&self, p: &[f64], t: f64) -> f64 {
        let (e, _, _) = self.envelope(p, t);
        let mut y = 0.0;
        for k in 0..self.n_sines {
            let (f, c, s) = (p[3 * k], p[3 * k + 1], p[3 * k + 2]);
            let (sn, cs) = (TAU * f * t).sin_cos();
            y += c * cs + s * sn;
        }
        y * e + if self.constant { p[p.len() - 1] } else { 0.0 }
    }

    fn n_params(&self) -> usize {
        3 * self.n_sines + if self.decay { 2 } else { 0 } + usize::from(self.constant)
    }
}

impl LeastSquares for SineModel<'_> {
    fn n_residuals(&self) -> usize {
        self.times.len()
    }

    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        for (i, (&t, &y)) in self.times.iter().zip(self.values).enumerate() {
            out[i] = self.evaluate(p, t) - y;
        }
    }

    fn jacobian(&self, p: &[f64], out: &mut DMatrix<f64>) {
        let np = self.n_params();
        for (i, &t) in self.times.iter().enumerate() {
            let (e, de_dl, de_dp) = self.envelope(p, t);
            let mut osc = 0.0;
            for k in 0..self.n_sines {
                let (f, c, s) = (p[3 * k], p[3 * k + 1], p[3 * k + 2]);
                let (sn, cs) = (TAU * f * t).sin_cos();
                osc += c * cs + s * sn;
                out[(i, 3 * k)] = TAU * t * (-c * sn + s * cs) * e;
                out[(i, 3 * k + 1)] = cs * e;
                out[(i, 3 * k + 2)] = sn * e;
            }
            if self.decay {
                out[(i, 3 * self.n_sines)] = osc * de_dl;
                out[(i, 3 * self.n_sines + 1)] = osc * de_dp;
            }
            if self.constant {
                out[(i, np - 1)] = 1.0;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SineFitOptions {
    /// Starting frequencies, MHz. Their count sets the number of components.
    pub freqs: Vec<f64>,
    pub decay: bool,
    /// Starting T₂ (µs); defaults to the record length.
    pub t2_init: Option<f64>,
    pub p_init: f64,
    pub constant: bool,
    pub lm: LmConfig,
}

impl SineFitOptions {
    pub fn new(freqs: Vec<f64>) -> Self {
        Self { freqs, decay: true, t2_init: None, p_init: 1.0, constant: true, lm: LmConfig::default() }
    }
}

/// Time-domain multi-sine fit from given starting frequencies.
///
/// Starting amplitudes come from [`linear_components`]. Result names:
/// `f{k}`, `a{k}` (amplitude), `phi{k}` (phase of `a cos(2πft + φ)`),
/// `t2` and `p` when decaying, `offset` when a constant is fitted.
pub fn fit_sines(signal: &Signal, options: &SineFitOptions) -> Result<FitResult, AnalysisError> {
    let n = options.freqs.len();
    if n == 0 {
        return Err(AnalysisError::InvalidArgument("need at least one sine".into()));
    }
    signal.uniform_step()?;
    let span = signal.times[signal.len() - 1] - signal.times[0];
    let nudge = 0.25 / span;
    let freqs: Vec<f64> = options.freqs.iter().map(|&f| if f.abs() < nudge { nudge } else { f.abs() }).collect();
    let (quad, offset) = linear_components(signal, &freqs)?;
    let mut p0 = Vec::new();
    for q in &quad {
        p0.extend_from_slice(&[q.freq, q.cos, q.sin]);
    }
    if options.decay {
        p0.push(options.t2_init.unwrap_or(span).max(1e-9).ln());
        p0.push(options.p_init);
    }
    if options.constant {
        p0.push(offset);
    }
    let model = SineModel {
        times: &signal.times,
        values: &signal.values,
        n_sines: n,
        decay: options.decay,
        constant: options.constant,
    };
    let outcome = levenberg_marquardt(&model, &p0, &options.lm);
    let ci = outcome.ci95();
    let np = p0.len();
    let p = &outcome.params;
    let mut result = FitResult::from_outcome(&outcome);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| p[3 * a].abs().total_cmp(&p[3 * b].abs()));
    for (rank, &k) in order.iter().enumerate() {
        let idx = rank + 1;
        let (f, c) = (p[3 * k], p[3 * k + 1]);
        // a negative frequency is the same line with the sine term mirrored
        let sign = if f < 0.0 { -1.0 } else { 1.0 };
        let s = sign * p[3 * k + 2];
        let a = c.hypot(s);
        let mut grad_a = vec![0.0; np];
        let mut grad_phi = vec![0.0; np];
        if a > 0.0 {
            grad_a[3 * k + 1] = c / a;
            grad_a[3 * k + 2] = sign * s / a;
            grad_phi[3 * k + 1] = s / (a * a);
            grad_phi[3 * k + 2] = -sign * c / (a * a);
        }
        result.insert(format!("f{idx}"), f.abs(), ci[3 * k]);
        result.insert(format!("a{idx}"), a, outcome.ci95_of(&grad_a));
        result.insert(format!("phi{idx}"), (-s).atan2(c), outcome.ci95_of(&grad_phi));
    }
    if options.decay {
        let t2 = p[3 * n].exp();
        result.insert("t2", t2, t2 * ci[3 * n]);
        result.insert("p", p[3 * n + 1], ci[3 * n + 1]);
    }
    if options.constant {
        result.insert("offset", p[np - 1], ci[np - 1]);
    }
    Ok(result)
}

/// Evaluates a [`fit_sines`] result on `times`.
pub fn sine_curve(fit: &FitResult, times: &[f64]) -> Vec<f64> {
    let comps: Vec<(f64, f64, f64)> = (1..)
        .map_while(|k| {
            Some((fit.value(&format!("f{k}"))?, fit.value(&format!("a{k}"))?, fit.value(&format!("phi{k}"))?))
        })
        .collect();
    let decay = fit.value("t2").zip(fit.value("p"));
    let offset = fit.value("offset").unwrap_or(0.0);
    times
        .iter()
        .map(|&t| {
            let osc: f64 = comps.iter().map(|(f, a, phi)| a * (TAU * f * t + phi).cos()).sum();
            let env = decay.map_or(1.0, |(t2, p)| (-(t.abs() / t2).powf(p)).exp());
            osc * env + offset
        })
        .collect()
}

/// Damped multi-sine fit with starting frequencies from the tallest peaks
/// of a Hann-windowed, 4× padded spectrum (the zero-frequency lobe counts).
pub fn fit_damped_sines(signal: &Signal, n_sines: usize) -> Result<FitResult, AnalysisError> {
    fit_damped_sines_with(signal, n_sines, LmConfig::default())
}

/// [`fit_damped_sines`] with explicit solver settings.
pub fn fit_damped_sines_with(signal: &Signal, n_sines: usize, lm: LmConfig) -> Result<FitResult, AnalysisError> {
    if n_sines == 0 {
        return Err(AnalysisError::InvalidArgument("n_sines must be ≥ 1".into()));
    }
    let spec = compute_fft(signal, 4, Window::Hann)?;
    let peaks = local_maxima(&spec.freqs, &spec.magnitudes);
    if peaks.len() < n_sines {
        return Err(AnalysisError::NotEnoughPeaks { found: peaks.len(), needed: n_sines });
    }
    let freqs = peaks.iter().take(n_sines).map(|p| p.0).collect();
    fit_sines(signal, &SineFitOptions { lm, ..SineFitOptions::new(freqs) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::lm::jacobian_check;
    use crate::signal::{linspace, Meta};

    fn damped(t: &[f64], comps: &[(f64, f64, f64)], t2: f64, p: f64, b: f64) -> Signal {
        let v = t
            .iter()
            .map(|t| {
                let e = (-(t / t2).powf(p)).exp();
                comps.iter().map(|(f, a, ph)| a * (TAU * f * t + ph).cos()).sum::<f64>() * e + b
            })
            .collect();
        Signal::new(t.to_vec(), v, Meta::new("test")).unwrap()
    }

    #[test]
    fn jacobian_agrees_with_differences() {
        let t = linspace(0.0, 10.0, 100);
        let s = damped(&t, &[(0.3, 1.0, 0.0)], 5.0, 1.2, 0.0);
        let m = SineModel { times: &s.times, values: &s.values, n_sines: 2, decay: true, constant: true };
        let p = [0.31, 0.7, -0.2, 0.9, 0.1, 0.3, 1.5f64.ln(), 1.3, 0.05];
        assert!(jacobian_check(&m, &p) < 1e-5);
    }

    #[test]
    fn single_damped_cosine_exact() {
        let t = linspace(0.0, 20.0, 400);
        let s = damped(&t, &[(0.45, 0.8, 0.6)], 9.0, 1.1, 0.1);
        let fit = fit_damped_sines(&s, 1).unwrap();
        assert!(fit.converged);
        assert!((fit.value("f1").unwrap() - 0.45).abs() < 1e-8);
        assert!((fit.value("a1").unwrap() - 0.8).abs() < 1e-8);
        assert!((fit.value("phi1").unwrap() - 0.6).abs() < 1e-8);
        assert!((fit.value("t2").unwrap() - 9.0).abs() < 1e-6);
        assert!((fit.value("p").unwrap() - 1.1).abs() < 1e-8);
        assert!((fit.value("offset").unwrap() - 0.1).abs() < 1e-8);
        for (a, b) in sine_curve(&fit, &t).iter().zip(&s.values) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn linear_projection_exact() {
        let t = linspace(0.0, 20.0, 512);
        let s = damped(&t, &[(0.2, 0.5, 0.3), (0.9, 0.25, -1.0)], f64::INFINITY, 1.0, -0.2);
        let (q, off) = linear_components(&s, &[0.2, 0.9]).unwrap();
        assert!((q[0].amplitude() - 0.5).abs() < 1e-9);
        assert!((q[1].amplitude() - 0.25).abs() < 1e-9);
        assert!((off + 0.2).abs() < 1e-9);
        let (q0, _) = linear_components(&s, &[0.0, 0.2, 0.9]).unwrap();
        assert!((q0[0].cos + 0.2).abs() < 1e-9);
    }
}
