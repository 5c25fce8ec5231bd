//! Scenario runners. Each builds its certificates through the catalog and the
//! combinators, generates data, runs the verifier and fills a report.

mod basic;
mod covering;
mod gradient;

use std::time::Instant;

use tailcert::special::clopper_pearson_upper;
use tailcert::verify::{self, check_certificate, EmpiricalTail, MIN_REGRESSION_EXCEEDANCES};
use tailcert::{EvalRange, TailCertificate};

use crate::config::ScenarioConfig;
use crate::error::ScenarioError;
use crate::report::ExperimentReport;

pub use gradient::{sup_deviation, Design, SupEstimate};

/// Run `config.scenario` on `config.workers` threads.
pub fn run_scenario(config: ScenarioConfig) -> Result<ExperimentReport, ScenarioError> {
    let config = config.resolved()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| ScenarioError::Config(e.to_string()))?;
    let start = Instant::now();
    let mut report = ExperimentReport::new(config.clone());
    pool.install(|| dispatch(&config, &mut report))?;
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

fn dispatch(c: &ScenarioConfig, r: &mut ExperimentReport) -> Result<(), ScenarioError> {
    match c.scenario.as_str() {
        "gaussian-mean" => basic::gaussian_mean(c, r),
        "lp-norm" => basic::lp_norm(c, r),
        "linf-norm" => basic::linf_norm(c, r),
        "psi-tail" => basic::psi_tail(c, r),
        "subgaussian-l2" => basic::subgaussian_l2(c, r),
        "sample-mean-a1" => basic::sample_mean(c, r, 1.0),
        "sample-mean-a2" => basic::sample_mean(c, r, 2.0),
        "finite-max" => basic::finite_max(c, r),
        "quadratic-form-sup" => covering::quadratic_form_sup(c, r),
        "covariance-opnorm" => covering::covariance_opnorm(c, r),
        "empirical-gradient" => gradient::empirical_gradient(c, r),
        other => Err(ScenarioError::ScenarioUnknown(other.to_string())),
    }
}

/// Seed for the named stream of a scenario.
pub(crate) fn stream_seed(c: &ScenarioConfig, name: &str) -> u64 {
    tailcert::rng::derive_seed(c.seed, tailcert::rng::tag(name))
}

pub(crate) fn n_range(c: &ScenarioConfig) -> EvalRange {
    let lo = *c.n_grid.iter().min().expect("non-empty grid");
    let hi = *c.n_grid.iter().max().expect("non-empty grid");
    EvalRange::new(lo, hi, 8)
}

/// Smallest `t ≥ C2` with `C1·exp(−rₙf(t)) ≤ level`.
pub fn certified_threshold(cert: &TailCertificate, n: u64, level: f64) -> Result<f64, ScenarioError> {
    let lo = cert.c2();
    if cert.log_bound(n, lo)? <= level.ln() {
        return Ok(lo);
    }
    let mut hi = lo * 2.0;
    while cert.log_bound(n, hi)? > level.ln() {
        hi *= 2.0;
        if hi > 1e12 || !cert.in_domain(n, hi)? {
            return Err(ScenarioError::Config(format!("bound never reaches {level} at n={n}")));
        }
    }
    let mut lo = lo;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if cert.log_bound(n, mid)? > level.ln() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Verdict of `cert` against every probe of `tail`.
pub(crate) fn verdict(
    r: &mut ExperimentReport,
    key: &str,
    cert_key: &str,
    tail_key: &str,
) -> Result<bool, ScenarioError> {
    let v = check_certificate(&r.certificates[cert_key], &r.tails[tail_key].tail)?;
    let pass = v.pass;
    r.verdicts.insert(key.to_string(), v);
    Ok(pass)
}

/// Monte-Carlo verdict restricted to probes where the bound is at least the
/// Clopper–Pearson limit for [`MIN_REGRESSION_EXCEEDANCES`] exceedances.
/// Below that level a correct bound cannot be distinguished from zero at the
/// replicate count used.
pub(crate) fn resolvable_verdict(
    r: &mut ExperimentReport,
    key: &str,
    cert_key: &str,
    tail_key: &str,
) -> Result<Option<bool>, ScenarioError> {
    let cert = r.certificates[cert_key].clone();
    let tail = &r.tails[tail_key].tail;
    let kept = filter_resolvable(&cert, tail);
    if kept.probes.is_empty() {
        r.notes.push(format!("{key}: no resolvable probes; Monte-Carlo check skipped"));
        return Ok(None);
    }
    let v = check_certificate(&cert, &kept)?;
    r.notes.push(format!(
        "{key}: checked {} of {} probes with bound >= CP limit at k={MIN_REGRESSION_EXCEEDANCES}",
        kept.probes.len(),
        tail.probes.len()
    ));
    let pass = v.pass;
    r.verdicts.insert(key.to_string(), v);
    Ok(Some(pass))
}

pub(crate) fn filter_resolvable(cert: &TailCertificate, tail: &EmpiricalTail) -> EmpiricalTail {
    verify::filter_probes(tail, |p| {
        let floor = clopper_pearson_upper(MIN_REGRESSION_EXCEEDANCES, p.trials, tail.delta);
        matches!(cert.in_domain(p.n, p.t), Ok(true))
            && cert.eval_bound(p.n, p.t).map(|b| b >= floor).unwrap_or(false)
    })
}

/// Probes with at least [`MIN_REGRESSION_EXCEEDANCES`] exceedances.
pub(crate) fn informative(tail: &EmpiricalTail) -> EmpiricalTail {
    verify::filter_probes(tail, |p| p.exceedances >= MIN_REGRESSION_EXCEEDANCES)
}

/// Rate diagnostic; an insufficient-data outcome becomes a note.
pub(crate) fn rate_fit(
    r: &mut ExperimentReport,
    key: &str,
    tail_key: &str,
    cert: &TailCertificate,
    tolerance: f64,
) -> Result<(), ScenarioError> {
    match verify::rate_diagnostic(&r.tails[tail_key].tail, cert, tolerance) {
        Ok(fit) => {
            for (x, y) in fit.xs.iter().zip(&fit.ys) {
                r.plot(&format!("neglogp_vs_rf/{key}"), *x, *y);
            }
            r.rate_fits.insert(key.to_string(), fit);
        }
        Err(tailcert::VerifyError::InsufficientExceedances(m)) => {
            r.notes.push(format!("rate diagnostic {key}: {m}"));
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

pub(crate) fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_unstable_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

pub fn parse_strategy(name: &str) -> Result<tailcert::nets::NetStrategy, ScenarioError> {
    use tailcert::nets::NetStrategy;
    Ok(match name {
        "greedy" | "greedy_packing" => NetStrategy::greedy(),
        "angular" | "angular_lattice" => NetStrategy::AngularLattice,
        "shell" | "shell_lattice" => NetStrategy::ShellLattice,
        other => return Err(ScenarioError::Config(format!("unknown net strategy {other:?}"))),
    })
}

pub(crate) fn net_record(net: &tailcert::nets::Net) -> crate::report::NetRecord {
    crate::report::NetRecord {
        digest: net.digest(),
        points: net.len(),
        epsilon: net.epsilon,
        strategy: net.strategy.name().to_string(),
        cardinality_bound: net.cardinality_bound(),
        max_probe_distance: net.verification.as_ref().map(|v| v.max_probe_distance),
    }
}

pub(crate) fn net_error(e: tailcert::NetError) -> ScenarioError {
    match e {
        tailcert::NetError::BudgetExceeded(n) => ScenarioError::OracleBudgetExceeded(format!("net exceeded {n} points")),
        e => e.into(),
    }
}
