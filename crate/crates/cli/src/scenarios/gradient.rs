//! Uniform deviation of the empirical gradient of a logistic-type loss.
//!
//! For `u ∈ S^{d−1}` the process `uᵀ(∇L̂ₙ(θ) − ∇Lₙ(θ))` is maximized at
//! `u = Δ(θ)/‖Δ(θ)‖`, so the supremum over the product set reduces to
//! `sup_{‖θ‖ ≤ R} ‖Δ(θ)‖`, searched by a lattice net on the ball followed by
//! projected ascent.

use rayon::prelude::*;
use tailcert::catalog;
use tailcert::cert::{CertificateParts, IndexFamily, Provenance, UniformCertificate};
use tailcert::nets::{build_net, MetricSpaceSpec, Net, NetStrategy};
use tailcert::NetError;
use tailcert::rate::{Constant, RateFunction};
use tailcert::rng;
use tailcert::samplers::{psi_norm, DistSpec};
use tailcert::verify::{estimate_tail, fit_constants, tail_from_ratios, EmpiricalTail, FitSearch, ProbeGrid};
use tailcert::{covering_supremum, Dimension, EvalRange, LipschitzTerm, RateSequence, SizeSequence, Table, TailCertificate};

use super::covering::covariance_certificate;
use super::{certified_threshold, median, net_error, net_record, rate_fit, stream_seed};
use crate::config::ScenarioConfig;
use crate::error::ScenarioError;
use crate::oracle::{norm, sigmoid, sigmoid_prime, GradientOracle};
use crate::report::ExperimentReport;

pub const GRADIENT_DIM_LIMIT: usize = 8;
const DEFAULT_LEVEL: f64 = 1e-3;
const DEFAULT_BUDGET: usize = 256;
const DEFAULT_POLISH: usize = 50;
const STEP_DECAY: f64 = 0.85;

/// `n` design rows in dimension `d`, row-major.
#[derive(Debug, Clone)]
pub struct Design {
    pub d: usize,
    pub n: usize,
    pub x: Vec<f64>,
}

impl Design {
    pub fn draw(spec: &DistSpec, d: usize, n: usize, rng: &mut rng::Rng) -> Self {
        let mut x = Vec::with_capacity(n * d);
        for _ in 0..n {
            x.extend(spec.draw_vector(rng));
        }
        Design { d, n, x }
    }

    fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks_exact(self.d)
    }

    /// `∇L̂(θ) = (1/n) Σ xᵢ σ(θᵀxᵢ)`.
    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.d];
        for row in self.rows() {
            let s = sigmoid(dot(theta, row));
            g.iter_mut().zip(row).for_each(|(gi, xi)| *gi += s * xi);
        }
        let inv = 1.0 / self.n as f64;
        g.iter_mut().for_each(|gi| *gi *= inv);
        g
    }

    /// `(1/n) Σ σ′(θᵀxᵢ) xᵢ (xᵢᵀv)`.
    fn hessian_apply(&self, theta: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        for row in self.rows() {
            let w = sigmoid_prime(dot(theta, row)) * dot(row, v);
            out.iter_mut().zip(row).for_each(|(o, xi)| *o += w * xi);
        }
        let inv = 1.0 / self.n as f64;
        out.iter_mut().for_each(|o| *o *= inv);
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn deviation(design: &Design, oracle: &GradientOracle, theta: &[f64]) -> Vec<f64> {
    let pop = oracle.gradient(theta);
    design.gradient(theta).iter().zip(&pop).map(|(a, b)| a - b).collect()
}

fn project(theta: &mut [f64], radius: f64) {
    let r = norm(theta);
    if r > radius {
        theta.iter_mut().for_each(|t| *t *= radius / r);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupEstimate {
    pub net_value: f64,
    pub polished: f64,
    pub theta: Vec<f64>,
}

/// Net maximum of `‖Δ(θ)‖` and its polished value after `steps` projected
/// ascent moves of length `step0·0.85^k`; a move is kept only if it improves.
pub fn sup_deviation(
    design: &Design,
    oracle: &GradientOracle,
    net: &Net,
    radius: f64,
    steps: usize,
    step0: f64,
) -> SupEstimate {
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (i, p) in net.points().enumerate() {
        let v = norm(&deviation(design, oracle, p));
        if v > best.0 {
            best = (v, i);
        }
    }
    let net_value = best.0;
    let mut theta = net.point(best.1).to_vec();
    let mut value = net_value;
    let mut dir = ascent_direction(design, oracle, &theta);
    let mut step = step0;
    for _ in 0..steps {
        let Some(g) = &dir else { break };
        let mut cand: Vec<f64> = theta.iter().zip(g).map(|(t, gi)| t + step * gi).collect();
        project(&mut cand, radius);
        let v = norm(&deviation(design, oracle, &cand));
        if v > value {
            theta = cand;
            value = v;
            dir = ascent_direction(design, oracle, &theta);
        }
        step *= STEP_DECAY;
    }
    SupEstimate { net_value, polished: value, theta }
}

/// Unit direction of `∇(½‖Δ‖²) = (∇²L̂ − ∇²L)Δ`.
fn ascent_direction(design: &Design, oracle: &GradientOracle, theta: &[f64]) -> Option<Vec<f64>> {
    let delta = deviation(design, oracle, theta);
    let a = design.hessian_apply(theta, &delta);
    let b = oracle.hessian_apply(theta, &delta);
    let g: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    let gn = norm(&g);
    (gn > 0.0 && gn.is_finite()).then(|| g.into_iter().map(|x| x / gn).collect())
}

/// Lattice net of the θ-ball at radius `max(εₙ, ε)` with at most `budget` points.
/// Falls back to a greedy packing when no lattice spacing fits the budget.
fn theta_net(d: usize, radius: f64, eps_n: f64, budget: usize, seed: u64) -> Result<Net, ScenarioError> {
    let space = MetricSpaceSpec::Ball { d, radius };
    let vol = std::f64::consts::PI.powf(d as f64 / 2.0) / tailcert::special::ln_gamma(d as f64 / 2.0 + 1.0).exp();
    // grid spacing 2ε/√d inside a ball of radius R + ε
    let predicted = |e: f64| vol * ((radius + e) * (d as f64).sqrt() / (2.0 * e)).powi(d as i32);
    let cap = 1.9 * radius;
    let mut eps = eps_n.min(cap);
    while predicted(eps) > 1.5 * budget as f64 && eps < cap {
        eps *= 1.05;
    }
    while eps < cap {
        match build_net(&space, eps, seed, &NetStrategy::ShellLattice) {
            Ok(net) if net.len() <= budget => return Ok(net),
            // the clipped grid can overshoot the volumetric bound at coarse ε
            Ok(_) | Err(NetError::BudgetExceeded(_)) => {}
            Err(e) => return Err(net_error(e)),
        }
        eps *= 1.05;
    }
    let mut eps = eps_n.min(cap);
    loop {
        let greedy = NetStrategy::GreedyPacking { streak_factor: 200, point_cap: budget };
        match build_net(&space, eps, seed, &greedy) {
            Err(NetError::BudgetExceeded(_)) if eps < cap => eps = (eps * 1.05).min(cap),
            other => return other.map_err(net_error),
        }
    }
}

struct DimCerts {
    shape: TailCertificate,
    sup: TailCertificate,
    c: f64,
    c_cov: f64,
}

fn design_spec(d: usize) -> Result<(DistSpec, f64), ScenarioError> {
    let s = psi_norm(&DistSpec::Gaussian { mean: 0.0, sd: 1.0 }, 2.0)?.value;
    Ok((
        DistSpec::ScaledToUnitPsi { base: Box::new(DistSpec::IsotropicGaussianVector { d }), alpha: 2.0, scale: s },
        1.0 / s,
    ))
}

fn dimension_certificates(
    c: &ScenarioConfig,
    r: &mut ExperimentReport,
    d: usize,
    radius: f64,
    oracle: &GradientOracle,
    spec: &DistSpec,
) -> Result<DimCerts, ScenarioError> {
    let rate = RateSequence::DLogND(Dimension::Const(d as u64));
    let range = EvalRange::new(*c.n_grid.iter().min().unwrap(), *c.n_grid.iter().max().unwrap(), 8);
    let pointwise_shape = catalog::sample_mean_cert(1.0, &rate, "c")?;

    // fit the Bernstein constant on a few fixed (θ, u)
    let e = |i: usize| {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        v
    };
    let mut theta_r = e(0);
    theta_r[0] = radius;
    let points = [(vec![0.0; d], e(0)), (theta_r.clone(), e(0)), (theta_r, e(1.min(d - 1)))];
    let fit_grid = ProbeGrid {
        n_grid: c.n_grid.clone(),
        t_grid: (0..=20).map(|i| 1.0 + 0.1 * i as f64).collect(),
        trials: c.params.fit_replicates.unwrap_or(2000),
        delta: c.delta,
    };
    let mut probes = Vec::new();
    let mut merged: Option<EmpiricalTail> = None;
    for (k, (theta, u)) in points.iter().enumerate() {
        let sampler = |n: u64, g: &mut rng::Rng| {
            let design = Design::draw(spec, d, n as usize, g);
            dot(u, &deviation(&design, oracle, theta))
        };
        let tail = estimate_tail(
            &sampler,
            pointwise_shape.size(),
            &fit_grid,
            stream_seed(c, &format!("d{d}/pointwise{k}")),
            "pointwise_gradient",
        )?;
        probes.extend(tail.probes.iter().cloned());
        merged.get_or_insert(tail);
    }
    let mut merged = merged.expect("three fit points");
    merged.probes = probes;
    let (pointwise, v) = fit_constants(&pointwise_shape, &merged, &FitSearch::default())?;
    let cval = v.fitted["c"];
    r.add_tail(&format!("d{d}/pointwise_fit"), merged, Some(&format!("d{d}/pointwise")));
    r.verdicts.insert(format!("d{d}/pointwise_fit"), v);
    r.certificates.insert(format!("d{d}/pointwise"), pointwise.clone());

    // uniform over a product net of ball(R) × S^{d−1} at εₙ
    let eps = SizeSequence::Monomial { c: 2.0 * ((radius * radius + 1.0) * d as f64).sqrt(), a: -0.5, b: 0.0 };
    let mut card = Table::default();
    let mut kappa: f64 = 0.0;
    for n in range.grid().into_iter().chain(c.n_grid.iter().copied()) {
        let en = eps.eval(n)? / std::f64::consts::SQRT_2;
        let lc = d as f64 * ((1.0 + 2.0 * radius / en).ln() + (1.0 + 2.0 / en).ln());
        card.0.insert(n, lc.exp());
        kappa = kappa.max(lc / rate.eval(n)?);
    }
    let family = IndexFamily {
        description: format!("εₙ-net of ball(R={radius}) × S^{} (components at εₙ/√2)", d - 1),
        cardinality: SizeSequence::Custom(card),
    };
    let uniform = UniformCertificate::from_shared(&pointwise, family);

    // Mₙ = sup_θ ‖∇²L̂ − ∇²L‖ ≤ (τ²/4)(2 + ‖Σ̂/τ² − I‖)
    let cov_t: Vec<f64> = (1..=24).map(|i| 0.25 * i as f64).collect();
    let cov = covariance_certificate(d, &c.n_grid, &cov_t)?;
    let tau2 = oracle.tau * oracle.tau;
    let mut m_parts = cov.sup.to_parts();
    m_parts.size = SizeSequence::product(vec![
        SizeSequence::Const(tau2 / 4.0),
        SizeSequence::sum(vec![SizeSequence::Const(2.0), cov.sup.size().clone()]),
    ]);
    m_parts.c2 = m_parts.c2.max(1.0);
    m_parts.provenance = Provenance::from_children("hessian_deviation_bound", &[&cov.sup])
        .with_note("M ≤ (τ²/4)(2 + ‖Σ̂/τ² − I‖) since 0 ≤ ℓ″ ≤ 1/4; valid for t ≥ 1");
    let m_cert = m_parts.build()?;
    r.certificates.insert(format!("d{d}/hessian_sup"), m_cert.clone());

    let sup = covering_supremum(&uniform, kappa, &LipschitzTerm::Certified(m_cert), &eps, true, &range)?;
    r.certificates.insert(format!("d{d}/sup"), sup.clone());
    r.stat(format!("d{d}/kappa"), kappa);

    let shape = CertificateParts::new(
        SizeSequence::SqrtRateOverN(rate.clone()),
        rate,
        2.0,
        c.t_grid[0],
        // sub-Gaussian branch of the Bernstein tail, which governs the probed range t ≲ 1
        RateFunction::power(Constant::symbol("c"), 2.0),
        Provenance::leaf("rate_diagnostic_shape").with_note("quadratic shape, domain extended to the probe grid"),
    )
    .build()?;
    Ok(DimCerts { shape, sup, c: cval, c_cov: cov.c })
}

pub fn empirical_gradient(c: &ScenarioConfig, r: &mut ExperimentReport) -> Result<(), ScenarioError> {
    let radius = c.params.radius.unwrap_or(1.0);
    let level = c.params.certified_level.unwrap_or(DEFAULT_LEVEL);
    let budget = c.params.net_budget.unwrap_or(DEFAULT_BUDGET);
    let steps = c.params.polish_steps.unwrap_or(DEFAULT_POLISH);
    if !(radius > 0.0) {
        return Err(ScenarioError::Config("radius must be positive".into()));
    }
    r.notes.push("loss log(1 + e^x); population gradient by Stein's identity and Gauss–Hermite quadrature".into());
    r.notes.push("sup over u ∈ S^{d−1} evaluated exactly as ‖Δ(θ)‖; θ searched on a lattice net plus ascent".into());
    let mut medians = Vec::new();
    for &d in &c.dims {
        if d == 0 || d > GRADIENT_DIM_LIMIT {
            return Err(ScenarioError::DimensionTooLarge { scenario: c.scenario.clone(), d, limit: GRADIENT_DIM_LIMIT });
        }
        if let Some(&n) = c.n_grid.iter().find(|&&n| n as usize <= d) {
            return Err(ScenarioError::Config(format!("need n > d, got n={n} for d={d}")));
        }
        let (spec, tau) = design_spec(d)?;
        let oracle = GradientOracle::new(tau);
        r.stat(format!("d{d}/oracle_quadrature_error"), oracle.quadrature_error(radius));
        let certs = dimension_certificates(c, r, d, radius, &oracle, &spec)?;
        r.stat(format!("d{d}/c"), certs.c);
        r.stat(format!("d{d}/c_covariance"), certs.c_cov);

        let mut batches = Vec::new();
        for &n in &c.n_grid {
            let cell = format!("d{d}/n{n}");
            let eps_n = 2.0 * ((radius * radius + 1.0) * d as f64 / n as f64).sqrt();
            let net = theta_net(d, radius, eps_n, budget, stream_seed(c, &format!("{cell}/net")))?;
            r.nets.insert(cell.clone(), net_record(&net));
            r.plot("net_cardinality_vs_bound", net.cardinality_bound().unwrap_or(f64::NAN), net.len() as f64);
            let seed = stream_seed(c, &cell);
            let tag = rng::tag("design");
            let estimates: Vec<SupEstimate> = (0..c.replicates)
                .into_par_iter()
                .map(|i| {
                    let design = Design::draw(&spec, d, n as usize, &mut rng::substream(seed, tag, i));
                    sup_deviation(&design, &oracle, &net, radius, steps, net.epsilon)
                })
                .collect();
            let size = certs.shape.size().eval(n)?;
            let bound = certified_threshold(&certs.sup, n, level)? * certs.sup.size().eval(n)?;
            let lower_ok = estimates.iter().all(|e| e.net_value <= e.polished);
            let above = estimates.iter().filter(|e| e.polished > bound).count();
            let ratios: Vec<f64> = estimates.iter().map(|e| e.polished / size).collect();
            let med = median(&mut ratios.clone());
            let gain = median(&mut estimates.iter().map(|e| e.polished / e.net_value).collect::<Vec<_>>());
            let m = estimates.len() as f64;
            r.stat(format!("{cell}/net_points"), net.len());
            r.stat(format!("{cell}/net_epsilon"), net.epsilon);
            r.stat(format!("{cell}/target_epsilon"), eps_n);
            r.stat(format!("{cell}/median_sup_over_size"), med);
            r.stat(format!("{cell}/median_polish_gain"), gain);
            r.stat(format!("{cell}/certified_bound"), bound);
            r.stat(format!("{cell}/replicates_above_bound"), above);
            r.check(format!("{cell}/net_le_polished"), lower_ok);
            r.check(format!("{cell}/polished_le_certified"), (above as f64) / m <= level + 3.0 * (level / m).sqrt());
            r.plot(&format!("sup_over_size_vs_n/d={d}"), n as f64, med);
            medians.push(med);
            batches.push((n, size, ratios));
        }
        let tk = format!("d{d}/sup");
        let tail = tail_from_ratios(batches, &c.t_grid, c.delta, stream_seed(c, &tk), "empirical_gradient_sup")?;
        r.add_tail(&tk, tail, None);
        rate_fit(r, &format!("d{d}"), &tk, &certs.shape, 0.25)?;
        let fit = r.rate_fits.get(&format!("d{d}")).cloned();
        r.check(
            format!("d{d}/rate_fit_positive_r2_0.8"),
            fit.map(|f| f.slope > 0.0 && f.r_squared >= 0.8).unwrap_or(false),
        );
    }
    let finite = medians.iter().all(|m| m.is_finite() && *m > 0.0);
    let hi = medians.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = medians.iter().cloned().fold(f64::INFINITY, f64::min);
    r.stat("median_ratio_spread", hi / lo);
    r.check("medians_finite", finite);
    r.check("median_spread_at_most_4", finite && hi / lo <= 4.0);
    Ok(())
}
