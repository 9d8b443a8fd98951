//! Reproduction bundles: one data CSV and one gnuplot script per panel,
//! computed at the reference parameters.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use spinlab::analysis::{
    compute_fft, dc_lobe_edge, fit_lorentzians, fit_sines, largest_peaks, sine_curve, LorentzModel, SineFitOptions,
    Window,
};
use spinlab::analytic::sedor_frequencies;
use spinlab::experiments::{
    default_probe, polarization_transfer_signal, run_deer_esr, run_deer_rabi, run_hartmann_hahn_with, run_nv_esr,
    run_sedor, run_zeeman_scan, HartmannHahn, DEER_RABI_TAU,
};
use spinlab::io::{self, Table};
use spinlab::spin::GAMMA_E_MHZ_PER_G;
use spinlab::{linspace, ClusterParams, Meta, Spectrum};

use crate::commands::{DEFAULT_DEER_RABI, DEFAULT_DEER_TAU, DEFAULT_DS_RABI, DEFAULT_SPINLOCK_T};
use crate::error::CliError;

const TPPI_NU: f64 = 1.25;
const ZERO_FIELD_SPLITTING: f64 = 2870.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    NvEsr2a,
    DeerEsr2b,
    Sedor3b,
    Tppi3c,
    HartmannHahn4a,
    Transfer4b,
    DeerRabi,
    Zeeman,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        Self::NvEsr2a,
        Self::DeerEsr2b,
        Self::Sedor3b,
        Self::Tppi3c,
        Self::HartmannHahn4a,
        Self::Transfer4b,
        Self::DeerRabi,
        Self::Zeeman,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::NvEsr2a => "2a",
            Self::DeerEsr2b => "2b",
            Self::Sedor3b => "3b",
            Self::Tppi3c => "3c",
            Self::HartmannHahn4a => "4a",
            Self::Transfer4b => "4b",
            Self::DeerRabi => "s_deerrabi",
            Self::Zeeman => "s_zeeman",
        }
    }
}

impl FromStr for FigureId {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| {
            let known: Vec<&str> = Self::ALL.iter().map(|f| f.name()).collect();
            CliError::usage(format!("unknown figure '{s}' (known: {})", known.join(", ")))
        })
    }
}

struct Plot {
    title: String,
    xlabel: &'static str,
    ylabel: &'static str,
    /// `(column index from 1, legend, style)`
    series: Vec<(usize, &'static str, &'static str)>,
    extra: String,
}

fn gnuplot_script(csv_name: &str, plot: &Plot) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set datafile commentschars '#'");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set title '{}'", plot.title);
    let _ = writeln!(s, "set xlabel '{}'", plot.xlabel);
    let _ = writeln!(s, "set ylabel '{}'", plot.ylabel);
    s.push_str(&plot.extra);
    let parts: Vec<String> = plot
        .series
        .iter()
        .map(|(col, title, style)| format!("'{csv_name}' using 1:{col} with {style} title '{title}'"))
        .collect();
    let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
    s
}

fn params_meta(protocol: &str, p: &ClusterParams) -> Meta {
    Meta::new(protocol).with("params", serde_json::to_string(p).expect("plain struct"))
}

fn table(meta: Meta, headers: &[&str], columns: Vec<Vec<f64>>) -> Result<Table, CliError> {
    Table::new(meta, headers.iter().map(|h| h.to_string()).collect(), columns)
        .map_err(|e| CliError::Failure(e.to_string()))
}

fn nv_esr_2a(p: &ClusterParams) -> Result<(Table, Plot), CliError> {
    let grid = linspace(-3.0, 3.0, 121);
    let s = run_nv_esr(p, &grid, &default_probe())?;
    let inverted = Spectrum::new(s.freqs.clone(), s.magnitudes.iter().map(|m| 1.0 - m).collect(), s.meta.clone())
        .map_err(|e| CliError::Failure(e.to_string()))?;
    let (fit, peaks) = fit_lorentzians(&inverted, 3, None)?;
    let mut pv: Vec<f64> = peaks.peaks.iter().flat_map(|k| [k.center, k.width, k.amplitude]).collect();
    pv.push(fit.value("baseline").unwrap_or(0.0));
    let curve = grid.iter().map(|&f| 1.0 - LorentzModel::evaluate(&pv, 3, true, f)).collect();
    let centers = peaks.centers();
    let splitting = centers[2] - centers[0];
    let meta = s.meta.clone().with("fit_splitting_mhz", splitting);
    let t = table(meta, &["freq_mhz", "population", "lorentz_fit"], vec![grid, s.magnitudes, curve])?;
    let plot = Plot {
        title: format!("NV ESR, outer splitting {splitting:.3} MHz"),
        xlabel: "probe detuning (MHz)",
        ylabel: "NV |0> population",
        series: vec![(2, "simulation", "points pt 7 ps 0.6"), (3, "3-Lorentzian fit", "lines lw 2")],
        extra: String::new(),
    };
    Ok((t, plot))
}

fn deer_esr_2b(p: &ClusterParams) -> Result<(Table, Plot), CliError> {
    let grid = linspace(-20.0, 20.0, 161);
    let s = run_deer_esr(p, &grid, DEFAULT_DEER_TAU, DEFAULT_DS_RABI)?;
    let absolute = grid.iter().map(|f| GAMMA_E_MHZ_PER_G * p.b0 + f).collect();
    let t = table(s.meta.clone(), &["freq_mhz", "contrast", "abs_freq_mhz"], vec![grid, s.magnitudes, absolute])?;
    let plot = Plot {
        title: format!("DEER ESR, tau = {DEFAULT_DEER_TAU} us"),
        xlabel: "DS carrier offset from gamma_e B0 (MHz)",
        ylabel: "contrast",
        series: vec![(2, "simulation", "linespoints pt 7 ps 0.5")],
        extra: String::new(),
    };
    Ok((t, plot))
}

fn sedor_3b(p: &ClusterParams) -> Result<(Table, Plot), CliError> {
    let grid = linspace(0.0, 12.0, 241);
    let s = run_sedor(p, &grid, None, Some(8.0), 1.0)?;
    // one slow term below the resolution plus the three tallest resolved lines
    let spec = compute_fft(&s, 4, Window::Hann)?;
    let mut seeds = vec![0.5 / grid[grid.len() - 1]];
    seeds.extend(largest_peaks(&spec, 3, dc_lobe_edge(&spec), f64::INFINITY).into_iter().map(|(f, _)| f));
    let fit = fit_sines(&s, &SineFitOptions::new(seeds))?;
    let curve = sine_curve(&fit, &grid);
    let mut meta = s.meta.clone().with("fit_converged", fit.converged);
    for k in 1..=4 {
        if let Some(f) = fit.value(&format!("f{k}")) {
            meta = meta.with(format!("fit_f{k}_mhz"), f.abs());
        }
    }
    let t = table(meta, &["tau_us", "contrast", "sine_fit"], vec![grid, s.values, curve])?;
    let plot = Plot {
        title: "SEDOR, 4-sine fit".into(),
        xlabel: "tau (us)",
        ylabel: "contrast",
        series: vec![(2, "simulation", "points pt 7 ps 0.6"), (3, "damped 4-sine fit", "lines lw 2")],
        extra: String::new(),
    };
    Ok((t, plot))
}

/// Vertical markers at `ν ± Δᵢ/2`.
fn tppi_markers(p: &ClusterParams) -> String {
    let f = sedor_frequencies(p);
    let mut s = String::new();
    for d in [f.delta1, f.delta2, f.delta3, f.delta4.abs()] {
        for x in [TPPI_NU - d / 2.0, TPPI_NU + d / 2.0] {
            let _ = writeln!(s, "set arrow from {x}, graph 0 to {x}, graph 1 nohead lc rgb 'red' dt 2");
        }
    }
    s
}

fn tppi_3c(p: &ClusterParams) -> Result<(Table, Plot), CliError> {
    let s = run_sedor(p, &linspace(0.0, 20.0, 512), Some(TPPI_NU), None, 1.0)?;
    let spec = compute_fft(&s, 4, Window::None)?;
    let mut meta = s.meta.clone();
    meta.protocol = "sedor_fft".into();
    let t = table(meta, &["freq_mhz", "magnitude"], vec![spec.freqs, spec.magnitudes])?;
    let plot = Plot {
        title: format!("SEDOR with TPPI, nu = {TPPI_NU} MHz"),
        xlabel: "frequency (MHz)",
        ylabel: "|FFT|",
        series: vec![(2, "simulation", "lines lc rgb 'black'")],
        extra: format!("set xrange [0:3]\n{}", tppi_markers(p)),
    };
    Ok((t, plot))
}

fn hh_4a(p: &ClusterParams) -> Result<(Table, Plot), CliError> {
    let grid = linspace(0.0, 4.0, 201);
    let s = run_hartmann_hahn_with(p, &grid, &HartmannHahn::default())?;
    let t = table(s.meta.clone(), &["spinlock_us", "contrast"], vec![grid, s.values])?;
    let plot = Plot {
        title: "Hartmann-Hahn polarization transfer".into(),
        xlabel: "spin-lock duration T (us)",
        ylabel: "NV polarization",
        series: vec![(2, "simulation", "linespoints pt 7 ps 0.5")],
        extra: String::new(),
    };
    Ok((t, plot))
}

fn transfer_4b(p: &ClusterParams) -> Result<(Table, Plot), CliError> {
    let grid = linspace(0.0, 20.0, 512);
    let spectrum = |nv_phase: f64| -> Result<Spectrum, CliError> {
        let hh = HartmannHahn { nv_phase, ..HartmannHahn::default() };
        let s = polarization_transfer_signal(p, &hh, DEFAULT_SPINLOCK_T, &grid, Some(TPPI_NU))?;
        Ok(compute_fft(&s, 4, Window::None)?)
    };
    let (a, b) = (spectrum(0.0)?, spectrum(PI)?);
    let meta = params_meta("polarization_transfer_fft", p)
        .with("spinlock_t_us", DEFAULT_SPINLOCK_T)
        .with("tppi_nu_mhz", TPPI_NU);
    let t = table(meta, &["freq_mhz", "phase_0", "phase_pi"], vec![a.freqs, a.magnitudes, b.magnitudes])?;
    let plot = Plot {
        title: format!("SEDOR readout after transfer, T = {DEFAULT_SPINLOCK_T} us"),
        xlabel: "frequency (MHz)",
        ylabel: "|FFT|",
        series: vec![(2, "NV phase 0", "lines lc rgb 'orange'"), (3, "NV phase pi", "lines lc rgb 'purple'")],
        extra: format!("set xrange [0:3]\n{}", tppi_markers(p)),
    };
    Ok((t, plot))
}

fn deer_rabi_s(p: &ClusterParams) -> Result<(Table, Plot), CliError> {
    let grid = linspace(0.0, DEER_RABI_TAU, 256);
    let s = run_deer_rabi(p, &grid, DEFAULT_DEER_RABI)?;
    let t = table(s.meta.clone(), &["pulse_us", "contrast"], vec![grid, s.values])?;
    let plot = Plot {
        title: format!("DEER Rabi, DS Rabi {DEFAULT_DEER_RABI} MHz"),
        xlabel: "DS pulse length (us)",
        ylabel: "contrast",
        series: vec![(2, "simulation", "lines")],
        extra: String::new(),
    };
    Ok((t, plot))
}

fn zeeman_s(_: &ClusterParams) -> Result<(Table, Plot), CliError> {
    let z = run_zeeman_scan(&linspace(0.0, 1000.0, 101), ZERO_FIELD_SPLITTING)?;
    let meta = Meta::new("zeeman").with("zero_field_splitting_mhz", ZERO_FIELD_SPLITTING);
    let t = table(meta, &["b0_gauss", "nv_mhz", "ds_mhz"], vec![z.b0_gauss, z.nv_mhz, z.ds_mhz])?;
    let plot = Plot {
        title: "NV and dark-spin transition frequencies".into(),
        xlabel: "B0 (G)",
        ylabel: "frequency (MHz)",
        series: vec![(2, "NV |0> <-> |-1>", "lines lw 2"), (3, "dark spin", "lines lw 2")],
        extra: String::new(),
    };
    Ok((t, plot))
}

/// Writes `fig_<id>.csv` and `fig_<id>.gp` into `out_dir`.
pub fn write_figure(id: FigureId, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let p = ClusterParams::REFERENCE;
    let (t, plot) = match id {
        FigureId::NvEsr2a => nv_esr_2a(&p)?,
        FigureId::DeerEsr2b => deer_esr_2b(&p)?,
        FigureId::Sedor3b => sedor_3b(&p)?,
        FigureId::Tppi3c => tppi_3c(&p)?,
        FigureId::HartmannHahn4a => hh_4a(&p)?,
        FigureId::Transfer4b => transfer_4b(&p)?,
        FigureId::DeerRabi => deer_rabi_s(&p)?,
        FigureId::Zeeman => zeeman_s(&p)?,
    };
    let csv_name = format!("fig_{}.csv", id.name());
    let csv_path = out_dir.join(&csv_name);
    let gp_path = out_dir.join(format!("fig_{}.gp", id.name()));
    io::write_table(&csv_path, &t).map_err(|e| CliError::output(&csv_path.display().to_string(), e))?;
    io::write_atomic(&gp_path, gnuplot_script(&csv_name, &plot).as_bytes())
        .map_err(|e| CliError::output(&gp_path.display().to_string(), e))?;
    Ok(vec![csv_path, gp_path])
}
