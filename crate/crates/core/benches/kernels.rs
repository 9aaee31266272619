use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use sharpfront::pde::splitting::{convolve, kernel_weights};
use sharpfront::pde::{Domain, InitialData, Scheme, SchemeCtrl, Stepper};
use sharpfront::{Execution, ReactionSpec};

const PATHS: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn convolution(c: &mut Criterion) {
    let mut group = c.benchmark_group("convolution");
    for n in [8_000, 64_000] {
        let d = Domain::new(-40.0, 40.0, n).unwrap();
        let v = InitialData::SmoothedStep { at: 0.0, width: 1.0, left: 0.0, right: 1.0 }.resolve(&d, None).unwrap();
        let (offset, weights) = kernel_weights(d.dz(), 0.35, 0.002, 8.0);
        let mut out = vec![0.0; v.len()];
        for (name, exec) in PATHS {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| convolve(black_box(&v), offset, &weights, &mut out, exec))
            });
        }
    }
    group.finish();
}

fn stepping(c: &mut Criterion) {
    let spec = ReactionSpec::holder(0.75, 0.5, 0.5).unwrap();
    let d = Domain::new(-40.0, 40.0, 8_000).unwrap();
    let v0 = InitialData::Step { at: 0.0 }.resolve(&d, None).unwrap();
    let mut group = c.benchmark_group("step");
    for scheme in [Scheme::ImexFd, Scheme::SplittingGreen] {
        for (name, exec) in PATHS {
            let ctrl = SchemeCtrl { scheme, execution: exec, ..Default::default() };
            let mut stepper = Stepper::new(&spec, 0.3, &d, &ctrl).unwrap();
            let mut v = v0.clone();
            group.bench_function(BenchmarkId::new(scheme.name(), name), |b| b.iter(|| stepper.step(black_box(&mut v))));
        }
    }
    group.finish();
}

criterion_group!(benches, convolution, stepping);
criterion_main!(benches);
