use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use sosreg::counterex::{family_ln, FamilyParams};
use sosreg::cover::{control_distance, ControlDistanceParams, Variant};
use sosreg::par;
use sosreg::sos::{decompose, DecomposeParams};
use sosreg::{Ball, FunctionHandle};

fn mode() -> &'static str {
    if par::is_parallel() {
        "rayon"
    } else {
        "sequential"
    }
}

/// The same kernel through `par::map` and through a plain iterator.
fn control_distance_sweep(c: &mut Criterion) {
    let f = FunctionHandle::from_expr("x^4 + y^4 + x^2*y^2 + 0.1", &["x", "y"]).unwrap();
    let p = ControlDistanceParams::new(0.25, Variant::Full).unwrap();
    let pts = Ball::unit(2).sample(4096);
    let kernel = |x: &Vec<f64>| control_distance(&f, x, &p).unwrap();
    let mut g = c.benchmark_group("control_distance_4096");
    g.bench_function(BenchmarkId::new("par_map", mode()), |b| b.iter(|| black_box(par::map(&pts, kernel))));
    g.bench_function("iter_map", |b| b.iter(|| black_box(pts.iter().map(kernel).collect::<Vec<_>>())));
    g.finish();
}

fn family_sweep(c: &mut Criterion) {
    let fam = FamilyParams::standard(Some(0.5), 0.5).unwrap();
    let pts = Ball::unit(5).sample(20_000);
    let kernel = |x: &Vec<f64>| family_ln(&fam, x);
    let mut g = c.benchmark_group("family_ln_20000");
    g.bench_function(BenchmarkId::new("par_map", mode()), |b| b.iter(|| black_box(par::map(&pts, kernel))));
    g.bench_function("iter_map", |b| b.iter(|| black_box(pts.iter().map(kernel).collect::<Vec<_>>())));
    g.finish();
}

fn decompose_end_to_end(c: &mut Criterion) {
    let f = FunctionHandle::from_expr("x^4 + y^4 + 0.1", &["x", "y"]).unwrap();
    let params = DecomposeParams::new(Ball::new(vec![0.0, 0.0], 0.1));
    let mut g = c.benchmark_group("decompose");
    g.sample_size(10);
    g.bench_function(BenchmarkId::new("quartic_2d", mode()), |b| b.iter(|| black_box(decompose(&f, &params).unwrap())));
    g.finish();
}

criterion_group!(benches, control_distance_sweep, family_sweep, decompose_end_to_end);
criterion_main!(benches);
