use proptest::prelude::*;
use tailcert::cert::{CertificateParts, Provenance};
use tailcert::samplers::{psi_norm, sample, Batch, DistSpec};
use tailcert::special::{binomial_cdf, clopper_pearson_upper, normal_two_sided_sf};
use tailcert::verify::{check_certificate, estimate_tail_dist, exact_tail, fit_constants, FitSearch, ProbeGrid};
use tailcert::{catalog, RateFunction, RateSequence, SizeSequence};

/// Exact coverage `P(ucb(K) ≥ p)` for `K ~ Bin(m, p)`.
fn coverage(m: u64, p: f64, delta: f64) -> f64 {
    let mut cov = 0.0;
    let mut prev = 0.0;
    for k in 0..=m {
        let c = binomial_cdf(k, m, p);
        if clopper_pearson_upper(k, m, delta) >= p {
            cov += c - prev;
        }
        prev = c;
    }
    cov
}

#[test]
fn clopper_pearson_covers() {
    for &(m, p) in &[(50u64, 0.01), (200, 0.05), (500, 0.3), (1000, 0.002)] {
        let c = coverage(m, p, 0.01);
        assert!(c >= 0.99 - 1e-9, "m={m} p={p} coverage={c}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn ucb_monotone_in_k(m in 1u64..400, k in 0u64..400) {
        let k = k.min(m);
        let u = clopper_pearson_upper(k, m, 0.01);
        prop_assert!(u >= k as f64 / m as f64);
        if k < m {
            prop_assert!(clopper_pearson_upper(k + 1, m, 0.01) >= u);
        }
    }

    #[test]
    fn sampling_is_prefix_stable(seed in any::<u64>(), count in 1usize..50) {
        let spec = DistSpec::Exponential { lambda: 1.5, centered: true };
        let (Batch::Scalars(a), Batch::Scalars(b)) = (sample(&spec, count, seed).unwrap(), sample(&spec, count + 7, seed).unwrap()) else {
            panic!("scalar family")
        };
        prop_assert_eq!(&a[..], &b[..count]);
    }
}

#[test]
fn gaussian_psi2_norm_is_first_absolute_moment() {
    // p^{-1/2}‖Z‖_p is maximized at p = 1, where it equals √(2/π)
    let rec = psi_norm(&DistSpec::Gaussian { mean: 0.0, sd: 1.0 }, 2.0).unwrap();
    assert!((rec.value - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-9, "{rec:?}");
}

#[test]
fn gaussian_mean_passes_exact_and_rejects_too_tight() {
    let rate = RateSequence::LogN(1.0);
    let cert = catalog::gaussian_mean_cert(&rate).unwrap();
    let t_grid: Vec<f64> = (10..=60).map(|i| i as f64 / 10.0).collect();
    let size = cert.size().clone();
    let tail = exact_tail(&[100, 1000, 10000], &t_grid, &size, |n, s| normal_two_sided_sf(s * (n as f64).sqrt()), "normal")
        .unwrap();
    assert!(check_certificate(&cert, &tail).unwrap().pass);
    let tight = CertificateParts::new(size, rate, 0.1, 1.0, RateFunction::power(0.5, 2.0), Provenance::leaf("too tight"))
        .build()
        .unwrap();
    assert!(!check_certificate(&tight, &tail).unwrap().pass);
}

#[test]
fn estimates_do_not_depend_on_worker_count() {
    let spec = DistSpec::Gaussian { mean: 0.0, sd: 1.0 };
    let grid = ProbeGrid::new(vec![1, 2], vec![0.5, 1.0, 2.0], 20_000);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_tail_dist(&spec, &SizeSequence::Const(1.0), &grid, 42).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn fit_recovers_gaussian_exponent() {
    let shape = CertificateParts::new(
        SizeSequence::Const(1.0),
        RateSequence::Const(1.0),
        2.0,
        1.0,
        RateFunction::power(tailcert::rate::Constant::symbol("c"), 2.0),
        Provenance::leaf("shape"),
    )
    .build()
    .unwrap();
    let t_grid: Vec<f64> = (10..=50).map(|i| i as f64 / 10.0).collect();
    let tail = exact_tail(&[1], &t_grid, &SizeSequence::Const(1.0), |_, s| normal_two_sided_sf(s), "normal").unwrap();
    let (_, verdict) = fit_constants(&shape, &tail, &FitSearch::default()).unwrap();
    let c = verdict.fitted["c"];
    // 2Φ̄(t) ≤ 2e^{−t²/2}; the fitted constant sits just above 1/2
    assert!(c >= 0.5 && c < 0.6, "c = {c}");
}
