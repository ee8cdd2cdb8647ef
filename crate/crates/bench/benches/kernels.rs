use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use randers_bench::{swirl, verified_circle};
use randers_core::curve::randers_length;
use randers_core::measure::{volume_factor_quadrature, PhiSpec};
use randers_core::metric::TangentSample;
use randers_core::variational::{el_residual, hestenes_report, HestenesConfig};
use randers_core::ClosedCurve;

fn metric(c: &mut Criterion) {
    let plane = swirl();
    let s = TangentSample::new([0.8, -0.3], [0.2, 1.1]).unwrap();
    c.bench_function("fundamental_tensor", |b| {
        b.iter(|| plane.fundamental_tensor(black_box(&s)).unwrap())
    });
    let curve = ClosedCurve::ellipse(2.0, 1.0).unwrap();
    c.bench_function("randers_length", |b| {
        b.iter(|| randers_length(&plane, black_box(&curve)).unwrap())
    });
    let phi = PhiSpec::new("1+s", 2, 0.5).unwrap();
    c.bench_function("volume_factor_bh", |b| {
        b.iter(|| volume_factor_quadrature(black_box(&phi), randers_core::VolumeKind::BH).unwrap())
    });
}

fn variational(c: &mut Criterion) {
    let (ctx, circle) = verified_circle();
    c.bench_function("el_residual", |b| {
        b.iter(|| el_residual(&ctx, black_box(&circle)).unwrap())
    });
    let config = HestenesConfig::default();
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    group.bench_function("hestenes_report_200", |b| {
        b.iter(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            hestenes_report(&ctx, &circle, 200, &config, &mut rng).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, metric, variational);
criterion_main!(benches);
