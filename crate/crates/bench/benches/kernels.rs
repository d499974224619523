use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use toric_ech::atf::run_recursion;
use toric_ech::capacities::ech_convex_toric;
use toric_ech::embedfn::sample_embedding_function;
use toric_ech::latticepaths::{ck_via_paths, ConvexRegion};
use toric_ech::numeric::{int, rat};
use toric_ech::numtheory::{d_series, SurdPair};
use toric_ech::polygon::fano_domains;
use toric_ech::staircases::family_by_name;
use toric_ech_bench::{expansion, CASES};

fn capacities(c: &mut Criterion) {
    let mut g = c.benchmark_group("ech_convex_toric");
    for label in CASES {
        let x = expansion(label);
        g.bench_with_input(BenchmarkId::from_parameter(label), &x, |b, x| b.iter(|| ech_convex_toric(black_box(x), 20_000).unwrap()));
    }
    g.finish();
}

fn sampling(c: &mut Criterion) {
    let x = expansion("(3)");
    c.bench_function("embedding function (3), 60 points", |b| {
        b.iter(|| sample_embedding_function(&x, &int(1), &rat(13, 2), &rat(1, 10), 5_000).unwrap())
    });
}

fn paths(c: &mut Criterion) {
    let (_, hexagon) = fano_domains().into_iter().nth(6).unwrap();
    let region = ConvexRegion::from_polygon(&hexagon).unwrap();
    c.bench_function("ck_via_paths hexagon k=15", |b| b.iter(|| ck_via_paths(black_box(&region), 15).unwrap()));
}

fn recursion(c: &mut Criterion) {
    let f = family_by_name("(3;1)").unwrap();
    c.bench_function("atf recursion (3;1), 30 steps", |b| b.iter(|| run_recursion(f, 30).unwrap()));
}

fn defects(c: &mut Criterion) {
    let pair = SurdPair::from_expansion(&expansion("(3;1,1)")).unwrap();
    c.bench_function("d(T) for T <= 5000", |b| b.iter(|| d_series(black_box(&pair), 5_000)));
}

criterion_group! {
    name = kernels;
    config = Criterion::default().sample_size(10);
    targets = capacities, sampling, paths, recursion, defects
}
criterion_main!(kernels);
