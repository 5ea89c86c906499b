use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use holeplane::{
    source_signature, triangle_single_layer, EvaluationPath, GroundKernel, KernelConfig, Point3,
    SpectralConstants,
};
use holeplane_bench::{ball_points, bump_system};

fn kernel_paths(c: &mut Criterion) {
    let points = ball_points(32, 0.7);
    let mut group = c.benchmark_group("kernel");
    for p in [12, 24] {
        let kernel = GroundKernel::new(KernelConfig::new(1.0, p).unwrap()).unwrap();
        group.bench_with_input(BenchmarkId::new("series", p), &kernel, |b, k| {
            b.iter(|| {
                points
                    .windows(2)
                    .map(|w| k.dirichlet(w[0], w[1], EvaluationPath::Series).unwrap())
                    .sum::<f64>()
            })
        });
    }
    let kernel = GroundKernel::new(KernelConfig::new(1.0, 2).unwrap()).unwrap();
    group.sample_size(10);
    group.bench_function("integral", |b| {
        b.iter(|| {
            kernel
                .dirichlet(points[0], points[1], EvaluationPath::Integral)
                .unwrap()
        })
    });
    group.finish();
}

fn signatures(c: &mut Criterion) {
    let mut group = c.benchmark_group("signature");
    for p in [12, 24, 48] {
        let constants = SpectralConstants::new(p).unwrap();
        group.bench_with_input(BenchmarkId::new("interior", p), &constants, |b, k| {
            b.iter(|| source_signature(black_box(Point3::new(0.3, -0.2, 0.4)), k).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("ground", p), &constants, |b, k| {
            b.iter(|| source_signature(black_box(Point3::new(0.6, 0.5, 0.0)), k).unwrap())
        });
    }
    group.finish();
}

fn factored_matvec(c: &mut Criterion) {
    let mut group = c.benchmark_group("factored-matvec");
    group.sample_size(20);
    for edge in [0.3, 0.15] {
        let system = bump_system(edge, 1.5, 20);
        let ground = system.ground.as_ref().unwrap();
        let v = vec![1.0; system.len()];
        let mut out = vec![0.0; system.len()];
        group.bench_function(BenchmarkId::from_parameter(system.len()), |b| {
            b.iter(|| ground.apply_add(black_box(&v), &mut out))
        });
    }
    group.finish();
}

fn panel_integral(c: &mut Criterion) {
    let system = bump_system(0.5, 1.2, 4);
    let panel = &system.mesh.panels[0];
    let near = panel.centroid + panel.normal * 0.01;
    c.bench_function("triangle-single-layer", |b| {
        b.iter(|| triangle_single_layer(panel, black_box(near)))
    });
}

criterion_group!(benches, kernel_paths, signatures, factored_matvec, panel_integral);
criterion_main!(benches);
