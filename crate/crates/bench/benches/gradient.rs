use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tailcert::nets::{build_net, MetricSpaceSpec, NetStrategy};
use tailcert::rng;
use tailcert_bench::gradient_fixture;
use tailcert_cli::scenarios::sup_deviation;

fn bench_sup_deviation(c: &mut Criterion) {
    let mut group = c.benchmark_group("sup_deviation");
    group.sample_size(10);
    for (d, n) in [(2usize, 512usize), (4, 512), (8, 2048)] {
        let (design, oracle) = gradient_fixture(d, n, &mut rng::substream(5, 0, d as u64));
        let space = MetricSpaceSpec::Ball { d, radius: 1.0 };
        let strategy = NetStrategy::GreedyPacking { streak_factor: 200, point_cap: 4096 };
        let net = build_net(&space, 0.7, 9, &strategy).unwrap();
        group.bench_function(BenchmarkId::new(format!("d{d}"), n), |b| {
            b.iter(|| sup_deviation(&design, &oracle, &net, 1.0, 50, net.epsilon))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sup_deviation);
criterion_main!(benches);
