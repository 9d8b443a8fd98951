use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;
use spinlab::analysis::{
    compute_fft, dc_lobe_edge, extract_from_signal, fit_damped_sines_with, fit_lorentzians_with, inject_noise,
    lm::LmConfig, ExtractOptions, FitResult, LorentzOptions, Window,
};
use spinlab::analytic::{esr_splittings, sedor_frequencies, Components, SedorModel};
use spinlab::experiments::{
    default_probe, polarization_transfer_signal, run_deer_esr, run_deer_rabi, run_hartmann_hahn_with, run_nv_esr,
    run_sedor_with, DsPulse, HartmannHahn, SedorOptions,
};
use spinlab::io::{self, Table};
use spinlab::pulse::{Channel, Drive, PulseEvent};
use spinlab::{ClusterParams, Signal, Spectrum, SpinState};

use crate::config::{Protocol, RunConfig, Sweep};
use crate::error::CliError;

/// Overrides relative output paths with `$SPINLAB_OUT_DIR` when set.
pub fn resolve_out(path: &Path) -> PathBuf {
    match std::env::var_os("SPINLAB_OUT_DIR") {
        Some(dir) if path.is_relative() && !dir.is_empty() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

pub const DEFAULT_DEER_TAU: f64 = 3.0;
pub const DEFAULT_DS_RABI: f64 = 13.0;
pub const DEFAULT_DEER_RABI: f64 = 13.3;
pub const DEFAULT_SPINLOCK_T: f64 = 0.7;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON config: a full run description or bare cluster parameters.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub protocol: Option<Protocol>,
    /// Output CSV (default `<protocol>.csv`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TPPI rate, MHz.
    #[arg(long)]
    pub tppi: Option<f64>,
    /// DEER ESR echo time, µs.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Dark-spin Rabi frequency, MHz.
    #[arg(long)]
    pub ds_rabi: Option<f64>,
    #[arg(long)]
    pub t2: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Gaussian noise standard deviation added to the output values.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    pub start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub stop: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

pub enum Artifact {
    Signal(Signal),
    Spectrum(Spectrum),
}

impl Artifact {
    fn table(&self) -> Table {
        match self {
            Self::Signal(s) => io::signal_table(s),
            Self::Spectrum(s) => io::spectrum_table(s),
        }
    }
}

/// Runs the configured protocol. Noise, when requested, is added to the
/// time-domain trace before any transform.
pub fn run_protocol(config: &RunConfig, protocol: Protocol, sweep: &Sweep) -> Result<Artifact, CliError> {
    sweep.validate()?;
    let grid = sweep.grid();
    let p = &config.params;
    let o = &config.options;
    let sigma = o.noise_sigma.unwrap_or(0.0);
    let seed = o.seed.unwrap_or(0);
    let noisy = |s: Signal| -> Result<Signal, CliError> {
        if sigma == 0.0 {
            return Ok(s);
        }
        let mut s = inject_noise(&s, sigma, seed)?;
        s.meta = std::mem::take(&mut s.meta).with("noise_sigma", sigma).with("seed", seed);
        Ok(s)
    };
    let noisy_spectrum = |s: Spectrum| -> Result<Spectrum, CliError> {
        let as_signal = Signal::new(s.freqs, s.magnitudes, s.meta).map_err(|e| CliError::Failure(e.to_string()))?;
        let n = noisy(as_signal)?;
        Spectrum::new(n.times, n.values, n.meta).map_err(|e| CliError::Failure(e.to_string()))
    };
    let hh = HartmannHahn {
        rabi: o.hh_rabi.unwrap_or(HartmannHahn::default().rabi),
        hh_detuning: o.hh_detuning.unwrap_or(0.0),
        nv_phase: o.nv_phase.unwrap_or(0.0),
    };
    let artifact = match protocol {
        Protocol::NvEsr => {
            let probe = match o.probe_rabi {
                Some(r) if r > 0.0 && r.is_finite() => PulseEvent::finite(Channel::NV, Drive::resonant(r), 0.5 / r),
                Some(r) => return Err(CliError::usage(format!("probe_rabi {r} must be > 0"))),
                None => default_probe(),
            };
            Artifact::Spectrum(noisy_spectrum(run_nv_esr(p, &grid, &probe)?)?)
        }
        Protocol::DeerEsr => {
            let s = run_deer_esr(p, &grid, o.tau.unwrap_or(DEFAULT_DEER_TAU), o.ds_rabi.unwrap_or(DEFAULT_DS_RABI))?;
            Artifact::Spectrum(noisy_spectrum(s)?)
        }
        Protocol::Sedor => {
            let ds_pulse = match o.ds_rabi {
                Some(rabi) => DsPulse::Finite { rabi, detuning: (p.omega1 + p.omega2) / 2.0 },
                None => DsPulse::Ideal,
            };
            let options = SedorOptions { tppi_nu: o.tppi_nu, t2: o.t2, p: o.p.unwrap_or(1.0), ds_pulse };
            Artifact::Signal(noisy(run_sedor_with(p, &grid, &options, &SpinState::nv_polarized())?)?)
        }
        Protocol::HartmannHahn => Artifact::Signal(noisy(run_hartmann_hahn_with(p, &grid, &hh)?)?),
        Protocol::PolarizationTransfer => {
            let t = o.spinlock_t.unwrap_or(DEFAULT_SPINLOCK_T);
            let trace = noisy(polarization_transfer_signal(p, &hh, t, &grid, o.tppi_nu)?)?;
            let mut spectrum = compute_fft(&trace, o.zero_pad_factor.unwrap_or(4), o.window.unwrap_or_default())?;
            spectrum.meta = trace.meta.clone();
            Artifact::Spectrum(spectrum)
        }
        Protocol::DeerRabi => {
            Artifact::Signal(noisy(run_deer_rabi(p, &grid, o.ds_rabi.unwrap_or(DEFAULT_DEER_RABI))?)?)
        }
    };
    Ok(artifact)
}

pub fn simulate(args: &SimulateArgs) -> Result<PathBuf, CliError> {
    let mut config = RunConfig::load(&args.config)?;
    let protocol = args
        .protocol
        .or(config.protocol)
        .ok_or_else(|| CliError::usage("no protocol: pass --protocol or set \"protocol\" in the config"))?;
    let o = &mut config.options;
    o.tppi_nu = args.tppi.or(o.tppi_nu);
    o.tau = args.tau.or(o.tau);
    o.ds_rabi = args.ds_rabi.or(o.ds_rabi);
    o.t2 = args.t2.or(o.t2);
    o.p = args.p.or(o.p);
    o.noise_sigma = args.noise.or(o.noise_sigma);
    o.seed = args.seed.or(o.seed);
    let base = config.sweep.unwrap_or_else(|| protocol.default_sweep());
    let sweep = Sweep {
        start: args.start.unwrap_or(base.start),
        stop: args.stop.unwrap_or(base.stop),
        n_points: args.points.unwrap_or(base.n_points),
    };
    let artifact = run_protocol(&config, protocol, &sweep)?;
    let name = protocol.to_possible_value().expect("no skipped variants").get_name().to_string();
    let out = resolve_out(args.out.as_deref().unwrap_or(Path::new(&format!("{name}.csv"))));
    io::write_table(&out, &artifact.table()).map_err(|e| CliError::output(&out.display().to_string(), e))?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Fft,
    Lorentz,
    Sines,
    Extract,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Signal or spectrum CSV written by `simulate`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Output file (default `<input stem>_<mode>.csv|json`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub pad: usize,
    #[arg(long, default_value = "none")]
    pub window: Window,
    /// Number of Lorentzians (lorentz) or sines (sines).
    #[arg(long)]
    pub peaks: Option<usize>,
    /// Full NV ESR splitting A₁ − A₂, MHz (extract). Defaults to the value
    /// implied by the parameters recorded in the input, else 1.67.
    #[arg(long, allow_negative_numbers = true)]
    pub esr_splitting: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub esr_ci: f64,
    #[arg(long, default_value_t = 0.10)]
    pub delta4_bound: f64,
    /// Fit a decay envelope in the time-domain refinement (extract).
    #[arg(long)]
    pub decay: bool,
    /// Solver iteration cap (lorentz, sines).
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

fn recorded_params(table: &Table) -> Option<ClusterParams> {
    serde_json::from_str(table.meta.get("params")?).ok()
}

fn write_fit(out: &Path, fit: &FitResult) -> Result<(), CliError> {
    io::write_json(out, fit).map_err(|e| CliError::output(&out.display().to_string(), e))?;
    if fit.converged {
        Ok(())
    } else {
        Err(CliError::NotConverged(format!(
            "fit did not converge after {} iterations; partial result in {}",
            fit.iterations,
            out.display()
        )))
    }
}

pub fn analyze(args: &AnalyzeArgs) -> Result<PathBuf, CliError> {
    let mut lm = LmConfig::default();
    if let Some(n) = args.max_iterations {
        if n == 0 {
            return Err(CliError::usage("--max-iterations must be ≥ 1"));
        }
        lm.max_iterations = n;
    }
    let table = io::read_table(&args.input).map_err(|e| CliError::input(&args.input.display().to_string(), e))?;
    let is_spectrum = table.headers[0] == "freq_mhz";
    let as_signal = || -> Result<Signal, CliError> {
        if is_spectrum {
            return Err(CliError::usage(format!("mode {:?} needs a time-domain input", args.mode).to_lowercase()));
        }
        io::table_to_signal(&table).map_err(|e| CliError::input(&args.input.display().to_string(), e))
    };
    let stem = args.input.file_stem().and_then(|s| s.to_str()).unwrap_or("input");
    let default_name = |suffix: &str, ext: &str| PathBuf::from(format!("{stem}_{suffix}.{ext}"));

    match args.mode {
        Mode::Fft => {
            let spectrum = compute_fft(&as_signal()?, args.pad, args.window)?;
            let out = resolve_out(args.out.as_deref().unwrap_or(&default_name("fft", "csv")));
            io::write_spectrum_csv(&out, &spectrum).map_err(|e| CliError::output(&out.display().to_string(), e))?;
            Ok(out)
        }
        Mode::Lorentz => {
            let n = args.peaks.unwrap_or(3);
            let (spectrum, fmin) = if is_spectrum {
                let s = io::read_spectrum_csv(&args.input)
                    .map_err(|e| CliError::input(&args.input.display().to_string(), e))?;
                // ESR populations dip; fit the inverted trace
                let s = if s.meta.protocol == "nv_esr" {
                    let inv = s.magnitudes.iter().map(|m| 1.0 - m).collect();
                    Spectrum::new(s.freqs, inv, s.meta).map_err(|e| CliError::usage(e.to_string()))?
                } else {
                    s
                };
                (s, f64::NEG_INFINITY)
            } else {
                let s = compute_fft(&as_signal()?, args.pad, args.window)?;
                let edge = dc_lobe_edge(&s);
                (s, edge)
            };
            let options = LorentzOptions { fmin, lm, ..LorentzOptions::default() };
            let (fit, _) = fit_lorentzians_with(&spectrum, n, None, &options)?;
            let out = resolve_out(args.out.as_deref().unwrap_or(&default_name("lorentz", "json")));
            write_fit(&out, &fit)?;
            Ok(out)
        }
        Mode::Sines => {
            let fit = fit_damped_sines_with(&as_signal()?, args.peaks.unwrap_or(4), lm)?;
            let out = resolve_out(args.out.as_deref().unwrap_or(&default_name("sines", "json")));
            write_fit(&out, &fit)?;
            Ok(out)
        }
        Mode::Extract => {
            let esr_splitting = args
                .esr_splitting
                .or_else(|| recorded_params(&table).map(|p| p.a1 - p.a2))
                .unwrap_or(ExtractOptions::default().esr_splitting);
            let options = ExtractOptions {
                esr_splitting,
                esr_ci95: args.esr_ci,
                delta4_bound: args.delta4_bound,
                zero_pad_factor: args.pad,
                window: args.window,
                decay: args.decay,
            };
            let report = extract_from_signal(&as_signal()?, &options)?;
            let out = resolve_out(args.out.as_deref().unwrap_or(&default_name("extract", "json")));
            write_fit(&out, &report.to_fit_result())?;
            Ok(out)
        }
    }
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    /// Parameters (bare or inside a run config).
    #[arg(long)]
    pub config: PathBuf,
    /// Output JSON; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct AnalyticReport {
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub delta4: f64,
    /// Signed cosine coefficients of the symmetrized contrast; `null` when Δ₁Δ₂ = 0.
    pub amplitudes: Option<Components>,
    /// Magnitudes relative to the Δ₁/2 component.
    pub relative_amplitudes: Option<Components>,
    /// NV line offsets ±(A₁ − A₂)/2 and ±(A₁ + A₂)/2, MHz.
    pub esr_outer: f64,
    pub esr_inner: f64,
}

pub fn analytic_report(params: &ClusterParams) -> AnalyticReport {
    let f = sedor_frequencies(params);
    let model = SedorModel::new(params).ok();
    let (esr_outer, esr_inner) = esr_splittings(params);
    AnalyticReport {
        delta1: f.delta1,
        delta2: f.delta2,
        delta3: f.delta3,
        delta4: f.delta4,
        amplitudes: model.map(|m| m.raw),
        relative_amplitudes: model.map(|m| m.normalized),
        esr_outer,
        esr_inner,
    }
}

pub fn analytic(args: &AnalyticArgs) -> Result<Option<PathBuf>, CliError> {
    let config = RunConfig::load(&args.config)?;
    let report = analytic_report(&config.params);
    match &args.out {
        Some(path) => {
            let out = resolve_out(path);
            io::write_json(&out, &report).map_err(|e| CliError::output(&out.display().to_string(), e))?;
            Ok(Some(out))
        }
        None => {
            println!("{}", serde_json::to_string_pretty(&report).map_err(|e| CliError::Failure(e.to_string()))?);
            Ok(None)
        }
    }
}
