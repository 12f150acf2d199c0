use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use scramble_bench::fixture;
use scramble_core::dynamics::{propagate, uniform_grid, ChannelKind};
use scramble_core::models::ModelKind;
use scramble_core::observables::{coherence, entropy_components, haar_delta_otoc};
use scramble_core::Partition;

fn propagation(c: &mut Criterion) {
    let times = uniform_grid(5.0, 11).unwrap();
    let mut group = c.benchmark_group("propagate_6q_t5");
    group.sample_size(10);
    for (label, kind, channel, gamma) in [
        ("syk_unitary", ModelKind::Syk, ChannelKind::Computational, 0.0),
        ("syk_energy", ModelKind::Syk, ChannelKind::Energy, 0.1),
        ("syk_computational", ModelKind::Syk, ChannelKind::Computational, 0.1),
        ("mfi_computational", ModelKind::Mfi, ChannelKind::Computational, 0.1),
    ] {
        let (l, rho0) = fixture(kind, 6, channel, gamma);
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| propagate(black_box(&rho0), &l, &times).unwrap())
        });
    }
    group.finish();

    let (l, rho0) = fixture(ModelKind::Xxx, 4, ChannelKind::Computational, 0.1);
    c.bench_function("propagate_4q_dense_t5", |b| {
        b.iter(|| propagate(black_box(&rho0), &l, &times).unwrap())
    });
}

fn entropies(c: &mut Criterion) {
    let (l, rho0) = fixture(ModelKind::Syk, 6, ChannelKind::Computational, 0.1);
    let rho = propagate(&rho0, &l, &[0.0, 3.0]).unwrap().states.pop().unwrap();
    let part = Partition::first_qubit(6).unwrap();
    c.bench_function("entropy_components_6q", |b| {
        b.iter(|| entropy_components(black_box(&rho), &part).unwrap())
    });
    c.bench_function("coherence_6q", |b| b.iter(|| coherence(black_box(&rho), l.basis()).unwrap()));
}

fn otoc(c: &mut Criterion) {
    let times = uniform_grid(5.0, 11).unwrap();
    let (l, rho0) = fixture(ModelKind::Syk, 6, ChannelKind::Computational, 0.0);
    let part = Partition::first_qubit(6).unwrap();
    let mut group = c.benchmark_group("haar_otoc");
    group.sample_size(10);
    group.bench_function("syk_6q_4_samples", |b| {
        b.iter(|| haar_delta_otoc(black_box(&rho0), &part, &l, &times, 4, 7).unwrap())
    });
    group.finish();
}

criterion_group!(benches, propagation, entropies, otoc);
criterion_main!(benches);
