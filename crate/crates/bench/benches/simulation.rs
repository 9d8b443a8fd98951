use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use spinlab::analysis::{compute_fft, dc_lobe_edge, fit_lorentzians_with, LorentzOptions, Window};
use spinlab::experiments::{default_probe, run_deer_esr, run_nv_esr, run_sedor};
use spinlab::spin::{build_hamiltonian, propagator};
use spinlab::{linspace, ClusterParams};

fn propagators(c: &mut Criterion) {
    let h = build_hamiltonian(&ClusterParams::REFERENCE).unwrap();
    c.bench_function("propagator", |b| b.iter(|| propagator(black_box(&h), black_box(1.7)).unwrap()));
}

fn protocols(c: &mut Criterion) {
    let p = ClusterParams::REFERENCE;
    let tau = linspace(0.0, 20.0, 512);
    c.bench_function("sedor_512", |b| b.iter(|| run_sedor(black_box(&p), &tau, None, None, 1.0).unwrap()));
    let tppi = linspace(0.0, 20.0, 512);
    c.bench_function("sedor_512_tppi", |b| b.iter(|| run_sedor(black_box(&p), &tppi, Some(1.25), None, 1.0).unwrap()));
    let esr = linspace(-3.0, 3.0, 121);
    let probe = default_probe();
    c.bench_function("nv_esr_121", |b| b.iter(|| run_nv_esr(black_box(&p), &esr, &probe).unwrap()));
    let deer = linspace(-20.0, 20.0, 161);
    c.bench_function("deer_esr_161", |b| b.iter(|| run_deer_esr(black_box(&p), &deer, 3.0, 13.0).unwrap()));
}

fn analysis(c: &mut Criterion) {
    let s = run_sedor(&ClusterParams::REFERENCE, &linspace(0.0, 20.0, 512), None, None, 1.0).unwrap();
    c.bench_function("fft_512_pad4", |b| b.iter(|| compute_fft(black_box(&s), 4, Window::Hann).unwrap()));
    let spectrum = compute_fft(&s, 4, Window::None).unwrap();
    let options = LorentzOptions { fmin: dc_lobe_edge(&spectrum), ..LorentzOptions::default() };
    c.bench_function("fit_lorentzians_3", |b| {
        b.iter(|| fit_lorentzians_with(black_box(&spectrum), 3, None, &options).unwrap())
    });
}

criterion_group!(benches, propagators, protocols, analysis);
criterion_main!(benches);
