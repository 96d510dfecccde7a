use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use fellerdim::fractal::{
    box_counting_dim, capacity_dim_lower, image_points, make_cantor, BoxOptions, CapacityOptions,
};
use fellerdim::indices::estimate_indices;
use fellerdim::simulate::{simulate_path, SimOptions, TimeGrid};
use fellerdim::symbol::{eval_symbol, FrequencyGrid, StateGrid, StateTriplet};

fn symbol(c: &mut Criterion) {
    let stable = StateTriplet::stable(1, 1.5, 1.0).unwrap();
    let like = StateTriplet::stable_like(1, 1.2, 1.6).unwrap();
    c.bench_function("eval_symbol/stable", |b| {
        b.iter(|| eval_symbol(&stable, &[0.3], black_box(&[17.0])))
    });
    c.bench_function("eval_symbol/stable_like", |b| {
        b.iter(|| eval_symbol(&like, &[0.3], black_box(&[17.0])))
    });
    let xi = FrequencyGrid::dyadic(1, 0, 17);
    let x = StateGrid::default_probe(1);
    c.bench_function("estimate_indices/stable_like", |b| {
        b.iter(|| estimate_indices(&like, &xi, &x))
    });
}

fn simulate(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate_path");
    let opts = SimOptions::default();
    for (name, t) in [
        ("stable", StateTriplet::stable(1, 1.5, 1.0).unwrap()),
        ("stable_like", StateTriplet::stable_like(1, 1.2, 1.6).unwrap()),
    ] {
        let grid = TimeGrid::uniform(2f64.powi(-12));
        g.bench_function(name, |b| b.iter(|| simulate_path(&t, &grid, &opts, 1, black_box(0))));
    }
    g.finish();
}

fn dimension(c: &mut Criterion) {
    let t = StateTriplet::stable(1, 1.5, 1.0).unwrap();
    let mut g = c.benchmark_group("dimension");
    g.sample_size(10);
    for depth in [12u32, 16] {
        let set = make_cantor(1.0 / 3.0, depth).unwrap();
        let path = simulate_path(&t, &set.time_grid(), &SimOptions::default(), 5, 0).unwrap();
        let pts = image_points(&path, &set).unwrap();
        g.bench_with_input(BenchmarkId::new("box_counting", depth), &pts, |b, pts| {
            b.iter(|| box_counting_dim(pts, 1, &BoxOptions::default()))
        });
        g.bench_with_input(BenchmarkId::new("capacity", depth), &path, |b, path| {
            b.iter(|| capacity_dim_lower(path, &set, &CapacityOptions::default()))
        });
    }
    g.finish();
}

criterion_group!(benches, symbol, simulate, dimension);
criterion_main!(benches);
