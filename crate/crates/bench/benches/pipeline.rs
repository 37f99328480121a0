use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use fractile::ifs::presets;
use fractile::neighbor::DEFAULT_CANDIDATE_CAP;
use fractile::render::{neighborhood_window, render_attractor, render_zoom_frame, Window, DEFAULT_PALETTE};
use fractile::zoom::random_walk;
use fractile::{build_neighbor_graph, build_neighborhood_graph, Analysis, AnalysisOptions, NeighborFilter};
use fractile_bench::{fixture, NEIGHBORHOOD_FIXTURES};

fn neighbor_graph(c: &mut Criterion) {
    let mut group = c.benchmark_group("neighbor_graph");
    for name in ["chair", "example-a", "example-b"] {
        let spec = presets::load(name);
        group.bench_function(name, |b| {
            b.iter(|| build_neighbor_graph(black_box(&spec), DEFAULT_CANDIDATE_CAP).unwrap())
        });
    }
    group.finish();
}

fn neighborhood_graph(c: &mut Criterion) {
    let mut group = c.benchmark_group("neighborhood_graph");
    group.sample_size(10);
    for &(name, filter) in NEIGHBORHOOD_FIXTURES {
        let f = fixture(name, filter);
        group.bench_function(name, |b| {
            b.iter(|| build_neighborhood_graph(black_box(&f.graph), &f.seed, f.filter, 10_000_000).unwrap())
        });
    }
    group.finish();
}

fn stationary(c: &mut Criterion) {
    let mut group = c.benchmark_group("stationary");
    group.sample_size(10);
    // K = 333 takes the exact rational path, K = 6291 the power iteration.
    for name in ["example-a-prime", "example-b"] {
        let f = fixture(name, NeighborFilter::All);
        let s = build_neighborhood_graph(&f.graph, &f.seed, f.filter, 10_000_000)
            .unwrap()
            .substitution_matrix();
        group.bench_function(name, |b| b.iter(|| s.stationary_distribution().unwrap()));
    }
    group.finish();
}

fn zoom_walk(c: &mut Criterion) {
    let a = Analysis::run(&presets::load("example-a"), &AnalysisOptions::default()).unwrap();
    c.bench_function("zoom/random_walk_100k", |b| {
        b.iter(|| random_walk(&a.model, 0, black_box(100_000), 7))
    });
}

fn render(c: &mut Criterion) {
    let mut group = c.benchmark_group("render");
    let spec = presets::load("chair");
    let win = Window::around(&spec, 256);
    group.bench_function("chair_attractor_256", |b| b.iter(|| render_attractor(&spec, win, 12)));
    let opts = AnalysisOptions {
        filter: NeighborFilter::Continuum,
        ..AnalysisOptions::default()
    };
    let a = Analysis::run(&spec, &opts).unwrap();
    let win = neighborhood_window(&a.graph, 256);
    let nbh = &a.neighborhoods.nbhs[0];
    group.bench_function("chair_zoom_frame_256", |b| {
        b.iter(|| render_zoom_frame(&a.graph, nbh, win, 10, &DEFAULT_PALETTE))
    });
    group.finish();
}

criterion_group!(benches, neighbor_graph, neighborhood_graph, stationary, zoom_walk, render);
criterion_main!(benches);
