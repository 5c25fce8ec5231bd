use criterion::{black_box, criterion_group, criterion_main, Criterion};
use tailcert::eval_bound;
use tailcert::samplers::DistSpec;
use tailcert::verify::{estimate_tail, ProbeGrid};
use tailcert::SizeSequence;
use tailcert_bench::gaussian_mean;

fn bench_eval_bound(c: &mut Criterion) {
    let cert = gaussian_mean();
    c.bench_function("eval_bound/gaussian_mean", |b| {
        b.iter(|| {
            let mut s = 0.0;
            for k in 0..50 {
                s += eval_bound(&cert, black_box(1000), 1.0 + 0.1 * k as f64).unwrap();
            }
            s
        })
    });
}

fn bench_estimate_tail(c: &mut Criterion) {
    let normal = DistSpec::Gaussian { mean: 0.0, sd: 1.0 };
    let sampler = |n: u64, rng: &mut tailcert::rng::Rng| normal.draw(rng) / (n as f64).sqrt();
    let size = SizeSequence::SqrtRateOverN(tailcert::RateSequence::LogN(1.0));
    let grid = ProbeGrid::new(vec![100, 1000], (0..20).map(|i| 1.0 + 0.25 * i as f64).collect(), 20_000);
    let mut group = c.benchmark_group("estimate_tail");
    group.sample_size(20);
    group.bench_function("gaussian_mean/2x20k", |b| {
        b.iter(|| estimate_tail(&sampler, &size, &grid, 7, "bench").unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_eval_bound, bench_estimate_tail);
criterion_main!(benches);
