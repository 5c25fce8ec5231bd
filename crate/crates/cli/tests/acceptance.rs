//! Acceptance criteria. Run with `cargo test -p tailcert-cli --test acceptance -- --nocapture`
//! to see one pass/fail line per criterion.

use std::time::{Duration, Instant};

use tailcert::discrete::soundness_suite;
use tailcert::nets::{build_net, verify_covering, MetricSpaceSpec, NetStrategy};
use tailcert_cli::{run_scenario, ExperimentReport, ScenarioConfig};

struct Outcome {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    limit: Duration,
}

fn minutes(m: u64) -> Duration {
    Duration::from_secs(60 * m)
}

fn run(scenario: &str, seed: u64, workers: usize) -> ExperimentReport {
    let mut c = ScenarioConfig::minimal(scenario, seed);
    c.workers = Some(workers);
    run_scenario(c).unwrap_or_else(|e| panic!("{scenario}: {e}"))
}

fn failing(r: &ExperimentReport) -> Vec<String> {
    let v = r.verdicts.iter().filter(|(_, v)| !v.pass).map(|(k, _)| format!("verdict {k}"));
    let c = r.checks.iter().filter(|(_, ok)| !**ok).map(|(k, _)| format!("check {k}"));
    v.chain(c).collect()
}

fn criterion_1() -> (bool, String) {
    let rep = soundness_suite(200, 12, 2024).expect("suite runs");
    (
        rep.violations.is_empty() && rep.instances == 200,
        format!("{} instances, {} checks, {} violations", rep.instances, rep.checks, rep.violations.len()),
    )
}

fn criterion_2() -> (bool, String, ExperimentReport) {
    let r = run("gaussian-mean", 11, 1);
    let exact = r.verdicts.get("exact").map(|v| (v.pass, v.checked)).unwrap_or((false, 0));
    let mc = r.verdicts.get("mc").map(|v| (v.pass, v.checked)).unwrap_or((false, 0));
    let ok = exact.0 && exact.1 > 0 && mc.0 && mc.1 > 0;
    (ok, format!("exact {:?}, mc {:?} (pass, probes checked)", exact, mc), r)
}

fn criterion_3() -> (bool, String) {
    let r = run("finite-max", 12, 1);
    let v = r.verdicts.get("exact");
    let ok = v.map(|v| v.pass && v.checked > 0).unwrap_or(false);
    (ok, format!("exact verdict {:?}, failing {:?}", v.map(|v| (v.pass, v.checked)), failing(&r)))
}

fn criterion_4() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for d in [2usize, 4, 8] {
        for eps in [0.5, 0.25] {
            let strategy = if d == 2 { NetStrategy::greedy() } else { NetStrategy::ShellLattice };
            let net = build_net(&MetricSpaceSpec::Sphere { d }, eps, 13, &strategy).expect("net builds");
            let cov = verify_covering(&net, 100_000, 14, 0.05);
            let bound = (1.0 + 2.0 / eps).powi(d as i32);
            let cell = net.len() as f64 <= bound && cov.max_probe_distance <= 1.05 * eps;
            ok &= cell;
            parts.push(format!("d{d}/ε{eps}: {} ≤ {bound:.0}, {:.3}", net.len(), cov.max_probe_distance));
        }
    }
    (ok, parts.join("; "))
}

fn criterion_5() -> (bool, String, ExperimentReport) {
    let r = run("covariance-opnorm", 15, 1);
    let mut ok = true;
    let mut parts = Vec::new();
    for d in [5, 10, 20] {
        let cov = r.stat_f64(&format!("d{d}/coverage")).unwrap_or(0.0);
        let ratio = r.stat_f64(&format!("d{d}/median_ratio")).unwrap_or(f64::INFINITY);
        ok &= cov >= 0.999 && ratio <= 30.0;
        parts.push(format!("d{d}: coverage {cov:.4}, median ratio {ratio:.2}"));
    }
    (ok, parts.join("; "), r)
}

fn criterion_6() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for s in ["sample-mean-a1", "sample-mean-a2"] {
        let r = run(s, 16, 1);
        let a = r.verdicts.get("fit_a").and_then(|v| v.fitted.get("c").copied()).unwrap_or(0.0);
        let b = r.verdicts.get("fit_b").and_then(|v| v.fitted.get("c").copied()).unwrap_or(0.0);
        let rel = (a - b).abs() / a.max(b);
        ok &= a > 0.0 && b > 0.0 && rel <= 0.2;
        parts.push(format!("{s}: c {a:.4} vs {b:.4} ({:.1}%)", 100.0 * rel));
    }
    (ok, parts.join("; "))
}

fn criterion_7() -> (bool, String, ExperimentReport) {
    let r = run("empirical-gradient", 17, 1);
    let a = r.checks.get("medians_finite") == Some(&true) && r.checks.get("median_spread_at_most_4") == Some(&true);
    let b = [2, 4, 8].iter().all(|d| r.checks.get(&format!("d{d}/rate_fit_positive_r2_0.8")) == Some(&true));
    let spread = r.stat_f64("median_ratio_spread").unwrap_or(f64::NAN);
    let fits: Vec<String> = r
        .rate_fits
        .iter()
        .map(|(k, f)| format!("{k} slope {:.3} R² {:.3}", f.slope, f.r_squared))
        .collect();
    (a && b, format!("(a) {a} spread {spread:.2}; (b) {b} [{}]", fits.join(", ")), r)
}

fn criterion_8(first: &[(&str, u64, &ExperimentReport)]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (scenario, seed, report) in first {
        let again = run(scenario, *seed, 2);
        let same = report.content_digest() == again.content_digest();
        ok &= same;
        parts.push(format!("{scenario}: {}", if same { "identical" } else { "differs" }));
    }
    (ok, parts.join("; "))
}

#[test]
fn acceptance_criteria() {
    let mut out = Vec::new();
    let mut timed = |id, name, limit, f: &mut dyn FnMut() -> (bool, String)| {
        let start = Instant::now();
        let (pass, detail) = f();
        let elapsed = start.elapsed();
        let o = Outcome { id, name, pass: pass && elapsed <= limit, detail, elapsed, limit };
        println!(
            "criterion {}: {} {} ({:.1}s, limit {}s) {}",
            o.id,
            if o.pass { "PASS" } else { "FAIL" },
            o.name,
            o.elapsed.as_secs_f64(),
            o.limit.as_secs(),
            o.detail
        );
        out.push(o);
    };

    timed(1, "algebra soundness", minutes(1), &mut criterion_1);
    let mut r2 = None;
    timed(2, "gaussian mean", minutes(2), &mut || {
        let (ok, d, r) = criterion_2();
        r2 = Some(r);
        (ok, d)
    });
    timed(3, "finite max", minutes(10), &mut criterion_3);
    timed(4, "nets", minutes(2), &mut criterion_4);
    let mut r5 = None;
    timed(5, "covariance operator norm", minutes(10), &mut || {
        let (ok, d, r) = criterion_5();
        r5 = Some(r);
        (ok, d)
    });
    timed(6, "sample-mean constants", minutes(5), &mut criterion_6);
    let mut r7 = None;
    timed(7, "empirical-gradient rate", minutes(30), &mut || {
        let (ok, d, r) = criterion_7();
        r7 = Some(r);
        (ok, d)
    });
    let (r2, r5, r7) = (r2.unwrap(), r5.unwrap(), r7.unwrap());
    timed(8, "determinism across worker counts", minutes(40), &mut || {
        criterion_8(&[("gaussian-mean", 11, &r2), ("covariance-opnorm", 15, &r5), ("empirical-gradient", 17, &r7)])
    });

    let failed: Vec<_> = out.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
