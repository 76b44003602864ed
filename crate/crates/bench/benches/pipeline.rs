use std::hint::black_box;

use cosegloc_bench::planted;
use cosegloc_core::{assemble, build_matrices, diffrac_matrix, solve, DesignMatrix, Hyperparams, SolverConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn sizes() -> [(usize, usize); 3] {
    // (images, superpixels per image)
    [(3, 8), (5, 20), (10, 30)]
}

fn bench_diffrac(c: &mut Criterion) {
    let mut group = c.benchmark_group("diffrac_matrix");
    for (images, n) in sizes() {
        let set = planted(images, n, 4);
        let x = DesignMatrix::from_rows(set.superpixels().map(|s| s.features.as_slice())).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(images * n), &x, |b, x| {
            b.iter(|| diffrac_matrix(black_box(x), 1.0).unwrap())
        });
    }
    group.finish();
}

fn bench_assemble(c: &mut Criterion) {
    let hp = Hyperparams::default();
    let mut group = c.benchmark_group("assemble");
    for (images, n) in sizes() {
        let set = planted(images, n, 4);
        let mats = build_matrices(&set, &hp).unwrap();
        group.bench_with_input(
            BenchmarkId::from_parameter(images * n),
            &(set, mats),
            |b, (set, mats)| b.iter(|| assemble(black_box(set), black_box(mats), &hp).unwrap()),
        );
    }
    group.finish();
}

fn bench_solve(c: &mut Criterion) {
    let hp = Hyperparams::default();
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("solve_joint");
    group.sample_size(20);
    for (images, n) in sizes() {
        let set = planted(images, n, 4);
        let mats = build_matrices(&set, &hp).unwrap();
        let qp = assemble(&set, &mats, &hp).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(qp.dim()), &qp.program, |b, program| {
            b.iter(|| solve(black_box(program), &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_diffrac, bench_assemble, bench_solve);
criterion_main!(benches);
