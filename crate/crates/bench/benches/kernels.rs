use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use cellmix::flow::FlowSpec;
use cellmix::solver::{random_bandlimited, ScalarSolver};
use cellmix::spectral::GridField6D;
use cellmix::twopoint::{random_field6, Derivatives, Op, TwoPointOps};

fn fft(c: &mut Criterion) {
    let f2 = random_bandlimited(256, 16.0, 1).unwrap();
    let grid = f2.to_grid();
    c.bench_function("fft2d_256_roundtrip", |b| {
        b.iter(|| black_box(cellmix::spectral::SpectralField2D::from_grid(256, black_box(&grid)).unwrap().to_grid()))
    });
    let f6: GridField6D = random_field6(8, 2, false, 1).unwrap();
    c.bench_function("fft6d_8_forward", |b| b.iter(|| black_box(f6.forward())));
}

fn solver_step(c: &mut Criterion) {
    let theta = random_bandlimited(256, 8.0, 2).unwrap();
    let mut solver = ScalarSolver::new(&theta, 1e-4, 5e-3, FlowSpec::steady()).unwrap();
    c.bench_function("scalar_step_256", |b| b.iter(|| solver.step().unwrap()));
}

fn two_point_op(c: &mut Criterion) {
    let ops = TwoPointOps::new(8);
    let f = random_field6(8, 2, false, 3).unwrap();
    let g = Derivatives::new(&f).grad_x();
    c.bench_function("apply_grad_c2_n8", |b| b.iter(|| black_box(ops.apply_grad(Op::C2, &g))));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = fft, solver_step, two_point_op
}
criterion_main!(benches);
