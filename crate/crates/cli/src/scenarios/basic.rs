//! Scalar scenarios: worked examples with closed-form or cheap oracles.

use std::f64::consts::PI;

use rand::Rng as _;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use tailcert::catalog::{self, MomentHypothesis, PsiNormHypothesis};
use tailcert::cert::{IndexFamily, UniformCertificate};
use tailcert::rng::Rng;
use tailcert::samplers::{psi_norm, scale_to_unit_psi, DistSpec};
use tailcert::special::{chi_square_sf, ln_gamma, normal_two_sided_sf};
use tailcert::verify::{estimate_tail, estimate_tail_dist, exact_tail, fit_constants, FitSearch, ProbeGrid};
use tailcert::{finite_max as finite_max_cert, EvalRange, RateSequence, SizeSequence, Table};

use super::{informative, n_range, rate_fit, resolvable_verdict, stream_seed, verdict};
use crate::config::ScenarioConfig;
use crate::error::ScenarioError;
use crate::report::ExperimentReport;

fn grid(c: &ScenarioConfig, n_grid: Vec<u64>) -> ProbeGrid {
    ProbeGrid { n_grid, t_grid: c.t_grid.clone(), trials: c.replicates, delta: c.delta }
}

fn normal(rng: &mut Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian_mean(c: &ScenarioConfig, r: &mut ExperimentReport) -> Result<(), ScenarioError> {
    let rate = RateSequence::LogN(1.0);
    let cert = catalog::gaussian_mean_cert(&rate)?;
    let size = cert.size().clone();
    r.certificates.insert("gaussian_mean".into(), cert.clone());
    r.notes.push("the mean of n standard normals has variance 1/n; X̄ₙ is drawn as N(0, 1/n)".into());

    let exact = exact_tail(&c.n_grid, &c.t_grid, &size, |n, s| normal_two_sided_sf(s * (n as f64).sqrt()), "normal_cdf")?;
    r.add_tail("exact", exact, Some("gaussian_mean"));
    verdict(r, "exact", "gaussian_mean", "exact")?;

    if !c.params.exact_only {
        let sampler = |n: u64, rng: &mut Rng| normal(rng) / (n as f64).sqrt();
        let mc = estimate_tail(&sampler, &size, &grid(c, c.n_grid.clone()), stream_seed(c, "mc"), "normal/sqrt(n)")?;
        r.add_tail("mc", mc, Some("gaussian_mean"));
        resolvable_verdict(r, "mc", "gaussian_mean", "mc")?;
        let mc_info = informative(&r.tails["mc"].tail);
        r.add_tail("mc_informative", mc_info, Some("gaussian_mean"));
        rate_fit(r, "mc", "mc_informative", &cert, 0.25)?;
    }
    rate_fit(r, "exact", "exact", &cert, 0.25)?;
    Ok(())
}

/// `Γ(r + 1)^{1/r}`, the `r`-th moment norm of Exp(1), tabulated on the grid.
fn exp_moment_size(c: &ScenarioConfig, rate: &RateSequence) -> Result<SizeSequence, ScenarioError> {
    let mut table = Table::default();
    for &n in &c.n_grid {
        let rn = rate.eval(n)?;
        table.0.insert(n, (ln_gamma(rn + 1.0) / rn).exp());
    }
    Ok(SizeSequence::Custom(table))
}

fn lp_setup(c: &ScenarioConfig) -> Result<(RateSequence, MomentHypothesis), ScenarioError> {
    let rate = RateSequence::LogN(2.0);
    let bound = exp_moment_size(c, &rate)?;
    Ok((rate.clone(), MomentHypothesis { order: rate, bound }))
}

fn lp_norm_of_exponentials(n: u64, p: f64, rng: &mut Rng) -> f64 {
    let xs: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let m = xs.iter().cloned().fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    m * xs.iter().map(|x| (x / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

pub fn lp_norm(c: &ScenarioConfig, r: &mut ExperimentReport) -> Result<(), ScenarioError> {
    let (rate, h) = lp_setup(c)?;
    let cert = catalog::lp_norm_cert(&h)?;
    r.certificates.insert("lp_norm".into(), cert.clone());
    r.notes.push("coordinates iid Exp(1); moment order rₙ = 2 log n; Yₙ = Γ(rₙ+1)^{1/rₙ}".into());
    let rate_c = rate.clone();
    let sampler = move |n: u64, rng: &mut Rng| lp_norm_of_exponentials(n, rate_c.eval(n).unwrap_or(1.0), rng);
    let mc = estimate_tail(&sampler, cert.size(), &grid(c, c.n_grid.clone()), stream_seed(c, "mc"), "lp_norm_exp1")?;
    r.add_tail("mc", mc, Some("lp_norm"));
    resolvable_verdict(r, "mc", "lp_norm", "mc")?;
    Ok(())
}

pub fn linf_norm(c: &ScenarioConfig, r: &mut ExperimentReport) -> Result<(), ScenarioError> {
    let (_, h) = lp_setup(c)?;
    let cert = catalog::linf_norm_cert(&h, 2.0, &n_range(c))?;
    r.certificates.insert("linf_norm".into(), cert.clone());
    r.notes.push("coordinates iid Exp(1); rₙ = 2 log n; exact oracle P(max ≥ s) = 1 − (1 − e^{−s})ⁿ".into());
    let exact = exact_tail(
        &c.n_grid,
        &c.t_grid,
        cert.size(),
        |n, s| -f64::exp_m1(n as f64 * f64::ln_1p(-(-s).exp())),
        "iid_exp_max",
    )?;
    r.add_tail("exact", exact, Some("linf_norm"));
    verdict(r, "exact", "linf_norm", "exact")?;
    if !c.params.exact_only {
        // max of n iid Exp(1) has the law of −log(1 − U^{1/n})
        let sampler = |n: u64, rng: &mut Rng| {
            let u: f64 = rng.gen();
            -f64::ln_1p(-u.powf(1.0 / n as f64))
        };
        let mc = estimate_tail(&sampler, cert.size(), &grid(c, c.n_grid.clone()), stream_seed(c, "mc"), "iid_exp_max")?;
        r.add_tail("mc", mc, Some("linf_norm"));
        resolvable_verdict(r, "mc", "linf_norm", "mc")?;
    }
    Ok(())
}

pub fn psi_tail(c: &ScenarioConfig, r: &mut ExperimentReport) -> Result<(), ScenarioError> {
    let alphas = match c.params.alpha {
        Some(a) => vec![a],
        None => vec![2.0, 1.0],
    };
    let rate = RateSequence::Const(4.0);
    let range = EvalRange::new(1, 1, 2);
    for alpha in alphas {
        let base = if alpha == 2.0 {
            DistSpec::Gaussian { mean: 0.0, sd: 1.0 }
        } else if alpha == 1.0 {
            DistSpec::Exponential { lambda: 1.0, centered: false }
        } else {
            return Err(ScenarioError::Config(format!("psi-tail supports alpha 1 or 2, got {alpha}")));
        };
        let spec = scale_to_unit_psi(&base, alpha)?;
        let scale = match &spec {
            DistSpec::ScaledToUnitPsi { scale, .. } => *scale,
            _ => unreachable!(),
        };
        let h = PsiNormHypothesis { alpha, norm_bound: 1.0, per_coordinate: false, dimension: None };
        let cert = catalog::from_psi_norm(&h, &rate, &range)?;
        let key = format!("psi{alpha}");
        r.certificates.insert(key.clone(), cert.clone());
        r.stat(format!("{key}/psi_norm_of_base"), scale);
        let exact = exact_tail(
            &c.n_grid,
            &c.t_grid,
            cert.size(),
            move |_, s| if alpha == 2.0 { normal_two_sided_sf(s * scale) } else { (-s * scale).exp() },
            if alpha == 2.0 { "scaled_normal" } else { "scaled_exp1" },
        )?;
        let ek = format!("{key}/exact");
        r.add_tail(&ek, exact, Some(&key));
        verdict(r, &ek, &key, &ek)?;
        if !c.params.exact_only {
            let mk = format!("{key}/mc");
            let mc = estimate_tail_dist(&spec, cert.size(), &grid(c, c.n_grid.clone()), stream_seed(c, &mk))?;
            r.add_tail(&mk, mc, Some(&key));
            resolvable_verdict(r, &mk, &key, &mk)?;
        }
    }
    Ok(())
}

pub fn subgaussian_l2(c: &ScenarioConfig, r: &mut ExperimentReport) -> Result<(), ScenarioError> {
    let d = c.dims[0];
    let rate = RateSequence::Const(d as f64);
    let shape = catalog::subgaussian_l2_cert(&tailcert::Dimension::Const(d as u64), &rate, 1.0, "c", &EvalRange::new(1, 1, 2))?;
    r.certificates.insert("shape".into(), shape.clone());
    // coordinates N(0, 1/s²) with s = ‖N(0,1)‖_{ψ2} = √(2/π)
    let s = psi_norm(&DistSpec::Gaussian { mean: 0.0, sd: 1.0 }, 2.0)?.value;
    r.stat("coordinate_scale", s);
    let df = d as f64;
    let exact = exact_tail(&c.n_grid, &c.t_grid, shape.size(), move |_, u| chi_square_sf(df, u * u * s * s), "chi_square")?;
    r.add_tail("exact", exact, Some("fitted"));
    let (fitted, v) = fit_constants(&shape, &r.tails["exact"].tail, &FitSearch::default())?;
    r.stat("fitted_c", v.fitted["c"]);
    r.certificates.insert("fitted".into(), fitted.clone());
    verdict(r, "exact", "fitted", "exact")?;
    if !c.params.exact_only {
        let sampler = move |_: u64, rng: &mut Rng| (0..d).map(|_| normal(rng).powi(2)).sum::<f64>().sqrt() / s;
        let mc = estimate_tail(&sampler, fitted.size(), &grid(c, c.n_grid.clone()), stream_seed(c, "mc"), "gaussian_vector_l2")?;
        r.add_tail("mc", mc, Some("fitted"));
        resolvable_verdict(r, "mc", "fitted", "mc")?;
    }
    Ok(())
}

/// Summands with unit ψα-norm: `(E − 1)/s` for α = 1, `Z/s` for α = 2.
fn mean_sampler(alpha: f64, s: f64) -> impl Fn(u64, &mut Rng) -> f64 + Sync {
    move |n: u64, rng: &mut Rng| {
        let nf = n as f64;
        if alpha == 1.0 {
            // a sum of n Exp(1) is Gamma(n, 1)
            let g: f64 = Gamma::new(nf, 1.0).expect("positive shape").sample(rng);
            (g / nf - 1.0) / s
        } else {
            normal(rng) / (s * nf.sqrt())
        }
    }
}

fn mean_exact(alpha: f64, s: f64) -> impl Fn(u64, f64) -> f64 {
    move |n: u64, u: f64| {
        let nf = n as f64;
        if alpha == 1.0 {
            let hi = chi_square_sf(2.0 * nf, 2.0 * nf * (1.0 + u * s));
            let lo_edge = 1.0 - u * s;
            let lo = if lo_edge > 0.0 { 1.0 - chi_square_sf(2.0 * nf, 2.0 * nf * lo_edge) } else { 0.0 };
            (hi + lo.max(0.0)).min(1.0)
        } else {
            normal_two_sided_sf(u * s * nf.sqrt())
        }
    }
}

pub fn sample_mean(c: &ScenarioConfig, r: &mut ExperimentReport, alpha: f64) -> Result<(), ScenarioError> {
    let rate = RateSequence::LogN(1.0);
    let shape = catalog::sample_mean_cert(alpha, &rate, "c")?;
    r.certificates.insert("shape".into(), shape.clone());
    let base = if alpha == 1.0 {
        DistSpec::Exponential { lambda: 1.0, centered: true }
    } else {
        DistSpec::Gaussian { mean: 0.0, sd: 1.0 }
    };
    let s = psi_norm(&base, alpha)?.value;
    r.stat("summand_psi_norm_before_scaling", s);
    r.notes.push(format!("summands {base:?} divided by their ψ{alpha} norm {s}"));

    let exact = exact_tail(&c.n_grid, &c.t_grid, shape.size(), mean_exact(alpha, s), "mean_exact")?;
    r.add_tail("exact", exact, Some("fit_exact"));
    let (fe, ve) = fit_constants(&shape, &r.tails["exact"].tail, &FitSearch::default())?;
    r.stat("c_exact", ve.fitted["c"]);
    r.certificates.insert("fit_exact".into(), fe);
    verdict(r, "exact", "fit_exact", "exact")?;
    if c.params.exact_only {
        return Ok(());
    }

    let sampler = mean_sampler(alpha, s);
    let mut fitted = Vec::new();
    for label in ["a", "b"] {
        let tk = format!("mc_{label}");
        let mc = estimate_tail(&sampler, shape.size(), &grid(c, c.n_grid.clone()), stream_seed(c, &tk), "sample_mean")?;
        let info = informative(&mc);
        r.add_tail(&tk, mc, Some(&format!("fit_{label}")));
        r.notes.push(format!("{tk}: constants fitted on {} probes with at least 10 exceedances", info.probes.len()));
        let (cert, v) = fit_constants(&shape, &info, &FitSearch::default())?;
        r.stat(format!("c_{label}"), v.fitted["c"]);
        fitted.push(v.fitted["c"]);
        r.certificates.insert(format!("fit_{label}"), cert);
        r.verdicts.insert(format!("fit_{label}"), v);
    }
    let (ca, cb) = (fitted[0], fitted[1]);
    r.stat("refit_relative_difference", (cb - ca).abs() / ca);
    r.check("constants_positive", ca > 0.0 && cb > 0.0);
    r.check("refit_within_20_percent", (cb - ca).abs() <= 0.2 * ca);
    rate_fit(r, "mc_a", "mc_a", &r.certificates["fit_a"].clone(), 0.25)?;
    Ok(())
}

pub fn finite_max(c: &ScenarioConfig, r: &mut ExperimentReport) -> Result<(), ScenarioError> {
    let rate = RateSequence::LogN(1.0);
    let range = n_range(c);
    let h = PsiNormHypothesis { alpha: 2.0, norm_bound: 1.0, per_coordinate: false, dimension: None };
    let base = catalog::from_psi_norm(&h, &rate, &range)?;
    r.certificates.insert("member".into(), base.clone());
    let family = IndexFamily {
        description: "m = n iid unit-ψ2 Gaussians".into(),
        cardinality: SizeSequence::Monomial { c: 1.0, a: 1.0, b: 0.0 },
    };
    let cert = finite_max_cert(&UniformCertificate::from_shared(&base, family), 1.0, &range)?;
    r.stat("c2_new", cert.c2());
    r.certificates.insert("finite_max".into(), cert.clone());
    let s = (2.0 / PI).sqrt();
    let t_grid: Vec<f64> = c.t_grid.iter().copied().filter(|t| *t >= cert.c2() * (1.0 - 1e-12)).collect();
    if t_grid.is_empty() {
        return Err(ScenarioError::Config(format!("t grid has no point above C2 = {}", cert.c2())));
    }
    let exact = exact_tail(
        &c.n_grid,
        &t_grid,
        cert.size(),
        move |m, u| -f64::exp_m1(m as f64 * f64::ln_1p(-normal_two_sided_sf(u * s))),
        "iid_max_normal",
    )?;
    r.add_tail("exact", exact, Some("finite_max"));
    verdict(r, "exact", "finite_max", "exact")?;
    if !c.params.exact_only {
        let sampler = move |m: u64, rng: &mut Rng| (0..m).map(|_| normal(rng).abs()).fold(0.0, f64::max) / s;
        let g = ProbeGrid { n_grid: c.n_grid.clone(), t_grid, trials: c.replicates, delta: c.delta };
        let mc = estimate_tail(&sampler, cert.size(), &g, stream_seed(c, "mc"), "iid_max_normal")?;
        r.add_tail("mc", mc, Some("finite_max"));
        resolvable_verdict(r, "mc", "finite_max", "mc")?;
    }
    Ok(())
}
