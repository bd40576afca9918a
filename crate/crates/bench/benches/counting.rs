use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use negcount::bounds::{averaged_orlicz_norm, mu_sequence, Piece};
use negcount::fem::{count_negative_fem, FemCountConfig};
use negcount::graph::{count_negative_graph, GraphCountConfig};
use negcount::lattice::{assemble_lattice, count_negative_lattice, BoxTruncation};
use negcount::potential::{lift_lattice, make_family, FamilySpec, Profile1D};
use negcount::sturm::halfline_count;
use negcount::{ldlt_inertia, LatticePotential, PlanePotential};
use serde_json::json;

fn random_box(seed: u64) -> LatticePotential {
    let spec = FamilySpec::new("random-box", json!({"half_width": 20, "density": 0.02}), seed);
    make_family(&spec).unwrap().lattice().unwrap()
}

fn lattice(c: &mut Criterion) {
    let mut g = c.benchmark_group("lattice");
    for l in [16, 32, 64] {
        let v = LatticePotential::single((0, 0), 1.0).unwrap();
        let a = assemble_lattice(&v, 10.0, BoxTruncation::new(l).unwrap()).unwrap();
        g.bench_with_input(BenchmarkId::new("ldlt_inertia", l), &a, |b, a| {
            b.iter(|| ldlt_inertia(black_box(&a.matrix), 0.0))
        });
    }
    let v = random_box(3);
    g.bench_function("count_random_box", |b| {
        b.iter(|| count_negative_lattice(black_box(&v), 16.0, 64).unwrap())
    });
    g.finish();
}

fn continuum(c: &mut Criterion) {
    let mut g = c.benchmark_group("continuum");
    g.sample_size(10);
    let v = PlanePotential::radial_indicator(1.0, 1.0).unwrap();
    let cfg = FemCountConfig {
        m: 8,
        ..Default::default()
    };
    for alpha in [100.0, 400.0] {
        g.bench_with_input(BenchmarkId::new("fem_indicator", alpha), &alpha, |b, &a| {
            b.iter(|| count_negative_fem(&v, a, &cfg).unwrap())
        });
    }
    g.finish();
}

fn graph(c: &mut Criterion) {
    let spec = FamilySpec::new("edge-random", json!({"half_width": 3}), 1);
    let v = make_family(&spec).unwrap().edge().unwrap();
    let cfg = GraphCountConfig::default();
    c.bench_function("graph/count_edge_random", |b| {
        b.iter(|| count_negative_graph(black_box(&v), 4.0, &cfg).unwrap())
    });
}

fn one_dimensional(c: &mut Criterion) {
    let q = Profile1D::indicator(0.0, 3.0, 400.0).unwrap();
    c.bench_function("sturm/halfline_well", |b| b.iter(|| halfline_count(black_box(&q), None).unwrap()));
}

fn functionals(c: &mut Criterion) {
    let pieces: Vec<Piece> = (1..=64).map(|k| Piece::new(k as f64, 0.5)).collect();
    c.bench_function("bounds/averaged_orlicz_64", |b| {
        b.iter(|| averaged_orlicz_norm(black_box(&pieces), 100.0))
    });
    let lift = lift_lattice(&random_box(5));
    c.bench_function("bounds/mu_sequence_lift", |b| b.iter(|| mu_sequence(black_box(&lift))));
}

criterion_group!(benches, lattice, continuum, graph, one_dimensional, functionals);
criterion_main!(benches);
