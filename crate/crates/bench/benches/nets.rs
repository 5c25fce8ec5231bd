use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tailcert::nets::{build_net, verify_covering, MetricSpaceSpec, NetStrategy};

fn bench_build_net(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_net");
    group.sample_size(10);
    for (d, eps) in [(2usize, 0.25), (4, 0.5), (4, 0.25), (8, 0.5)] {
        let space = MetricSpaceSpec::Sphere { d };
        group.bench_with_input(BenchmarkId::new("shell", format!("d{d}_eps{eps}")), &space, |b, s| {
            b.iter(|| build_net(s, eps, 1, &NetStrategy::ShellLattice).unwrap())
        });
    }
    group.bench_function("greedy/d4_eps0.5", |b| {
        b.iter(|| build_net(&MetricSpaceSpec::Sphere { d: 4 }, 0.5, 1, &NetStrategy::greedy()).unwrap())
    });
    group.finish();
}

fn bench_verify_covering(c: &mut Criterion) {
    let net = build_net(&MetricSpaceSpec::Sphere { d: 4 }, 0.25, 1, &NetStrategy::ShellLattice).unwrap();
    let mut group = c.benchmark_group("verify_covering");
    group.sample_size(10);
    group.bench_function("d4_eps0.25/10k", |b| b.iter(|| verify_covering(&net, 10_000, 3, 0.05)));
    group.finish();
}

criterion_group!(benches, bench_build_net, bench_verify_covering);
criterion_main!(benches);
