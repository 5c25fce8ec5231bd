//! Monte-Carlo and exact-probe checks of tail certificates.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cert::{LowerTailCertificate, TailCertificate};
use crate::error::VerifyError;
use crate::rng::{self, Rng};
use crate::samplers::DistSpec;
use crate::sequence::{RateSequence, SizeSequence};
use crate::special::clopper_pearson_upper;

pub const DEFAULT_DELTA: f64 = 0.01;
/// Probes with fewer exceedances are left out of rate regressions.
pub const MIN_REGRESSION_EXCEEDANCES: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Events `|X| ≥ t|Y|`.
    Upper,
    /// Events `|X| ≤ t|Y|`.
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    MonteCarlo,
    /// Probabilities from a closed-form oracle; `ucb` is the exact value.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailProbe {
    pub n: u64,
    pub t: f64,
    pub trials: u64,
    pub exceedances: u64,
    pub ucb: f64,
    /// `yₙ`, or NaN when the size is drawn jointly with `Xₙ`.
    #[serde(with = "crate::float")]
    pub size_value: f64,
}

impl TailProbe {
    /// `k/m`, or the exact probability for oracle probes.
    pub fn frequency(&self, kind: ProbeKind) -> f64 {
        match kind {
            ProbeKind::Exact => self.ucb,
            ProbeKind::MonteCarlo => self.exceedances as f64 / self.trials as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTail {
    pub probes: Vec<TailProbe>,
    pub sampler_digest: String,
    pub joint: bool,
    pub delta: f64,
    pub seed: u64,
    pub kind: ProbeKind,
    pub side: Side,
}

/// Probe layout shared by the estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeGrid {
    pub n_grid: Vec<u64>,
    pub t_grid: Vec<f64>,
    pub trials: u64,
    pub delta: f64,
}

impl ProbeGrid {
    pub fn new(n_grid: Vec<u64>, t_grid: Vec<f64>, trials: u64) -> Self {
        ProbeGrid { n_grid, t_grid, trials, delta: DEFAULT_DELTA }
    }

    fn validate(&self) -> Result<(), VerifyError> {
        if self.n_grid.is_empty() || self.t_grid.is_empty() {
            return Err(VerifyError::BadGrid("empty grid".into()));
        }
        if self.trials == 0 {
            return Err(VerifyError::BadGrid("need at least one trial".into()));
        }
        if self.t_grid.windows(2).any(|w| !(w[0] <= w[1])) || self.t_grid.iter().any(|t| !(*t > 0.0)) {
            return Err(VerifyError::BadGrid("t grid must be positive and ascending".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(VerifyError::BadGrid(format!("delta {} outside (0, 1)", self.delta)));
        }
        Ok(())
    }
}

/// `|x|/|y|` with `|x| ≥ t·0` true for every `x`.
fn ratio(x: f64, y: f64) -> f64 {
    if y == 0.0 {
        f64::INFINITY
    } else {
        x.abs() / y.abs()
    }
}

fn counts(sorted: &[f64], t_grid: &[f64], side: Side) -> Vec<u64> {
    t_grid
        .iter()
        .map(|&t| match side {
            Side::Upper => (sorted.len() - sorted.partition_point(|&r| r < t)) as u64,
            Side::Lower => sorted.partition_point(|&r| r <= t) as u64,
        })
        .collect()
}

fn stream_tag(n: u64) -> u64 {
    rng::derive_seed(rng::tag("tail"), n)
}

fn estimate<F>(
    ratio_of: F,
    sizes: impl Fn(u64) -> Result<f64, VerifyError>,
    grid: &ProbeGrid,
    seed: u64,
    side: Side,
) -> Result<Vec<TailProbe>, VerifyError>
where
    F: Fn(u64, &mut Rng) -> f64 + Sync,
{
    grid.validate()?;
    let mut probes = Vec::with_capacity(grid.n_grid.len() * grid.t_grid.len());
    for &n in &grid.n_grid {
        let tag = stream_tag(n);
        // one batch per n, reused across the t grid
        let mut ratios: Vec<f64> = (0..grid.trials)
            .into_par_iter()
            .map(|i| ratio_of(n, &mut rng::substream(seed, tag, i)))
            .collect();
        ratios.par_sort_unstable_by(|a, b| a.total_cmp(b));
        let y = sizes(n)?;
        for (&t, k) in grid.t_grid.iter().zip(counts(&ratios, &grid.t_grid, side)) {
            probes.push(TailProbe {
                n,
                t,
                trials: grid.trials,
                exceedances: k,
                ucb: clopper_pearson_upper(k, grid.trials, grid.delta),
                size_value: y,
            });
        }
    }
    Ok(probes)
}

/// Empirical `P(|Xₙ| ≥ t·yₙ)` with deterministic sizes. Replicate `i` at index
/// `n` draws from its own substream, so results do not depend on thread count.
pub fn estimate_tail<S>(
    sampler: &S,
    size: &SizeSequence,
    grid: &ProbeGrid,
    seed: u64,
    sampler_digest: &str,
) -> Result<EmpiricalTail, VerifyError>
where
    S: Fn(u64, &mut Rng) -> f64 + Sync,
{
    estimate_tail_side(sampler, size, grid, seed, sampler_digest, Side::Upper)
}

pub fn estimate_tail_side<S>(
    sampler: &S,
    size: &SizeSequence,
    grid: &ProbeGrid,
    seed: u64,
    sampler_digest: &str,
    side: Side,
) -> Result<EmpiricalTail, VerifyError>
where
    S: Fn(u64, &mut Rng) -> f64 + Sync,
{
    let sizes = |n: u64| size.eval(n).map_err(VerifyError::from);
    let ys: Vec<f64> = grid.n_grid.iter().map(|&n| sizes(n)).collect::<Result<_, _>>()?;
    let lookup: BTreeMap<u64, f64> = grid.n_grid.iter().copied().zip(ys).collect();
    let probes = estimate(
        |n, rng| ratio(sampler(n, rng), lookup[&n]),
        |n| Ok(lookup[&n]),
        grid,
        seed,
        side,
    )?;
    Ok(EmpiricalTail {
        probes,
        sampler_digest: sampler_digest.to_string(),
        joint: false,
        delta: grid.delta,
        seed,
        kind: ProbeKind::MonteCarlo,
        side,
    })
}

/// Empirical `P(|Xₙ| ≥ t|Yₙ|)` for a sampler producing `(Xₙ, Yₙ)` pairs.
pub fn estimate_tail_joint<S>(
    sampler: &S,
    grid: &ProbeGrid,
    seed: u64,
    sampler_digest: &str,
) -> Result<EmpiricalTail, VerifyError>
where
    S: Fn(u64, &mut Rng) -> (f64, f64) + Sync,
{
    let probes = estimate(
        |n, rng| {
            let (x, y) = sampler(n, rng);
            ratio(x, y)
        },
        |_| Ok(f64::NAN),
        grid,
        seed,
        Side::Upper,
    )?;
    Ok(EmpiricalTail {
        probes,
        sampler_digest: sampler_digest.to_string(),
        joint: true,
        delta: grid.delta,
        seed,
        kind: ProbeKind::MonteCarlo,
        side: Side::Upper,
    })
}

/// Upper-tail probes from precomputed ratios `|Xₙ|/|Yₙ|`, one batch per `n`.
/// Used when the replicates are generated outside the verifier.
pub fn tail_from_ratios(
    batches: Vec<(u64, f64, Vec<f64>)>,
    t_grid: &[f64],
    delta: f64,
    seed: u64,
    sampler_digest: &str,
) -> Result<EmpiricalTail, VerifyError> {
    let grid = ProbeGrid { n_grid: batches.iter().map(|b| b.0).collect(), t_grid: t_grid.to_vec(), trials: 1, delta };
    grid.validate()?;
    let mut probes = Vec::new();
    for (n, y, mut ratios) in batches {
        if ratios.is_empty() {
            return Err(VerifyError::BadGrid(format!("no replicates at n={n}")));
        }
        ratios.sort_unstable_by(|a, b| a.total_cmp(b));
        let m = ratios.len() as u64;
        for (&t, k) in t_grid.iter().zip(counts(&ratios, t_grid, Side::Upper)) {
            probes.push(TailProbe { n, t, trials: m, exceedances: k, ucb: clopper_pearson_upper(k, m, delta), size_value: y });
        }
    }
    Ok(EmpiricalTail {
        probes,
        sampler_digest: sampler_digest.to_string(),
        joint: false,
        delta,
        seed,
        kind: ProbeKind::MonteCarlo,
        side: Side::Upper,
    })
}

/// Copy of `tail` keeping the probes accepted by `keep`.
pub fn filter_probes(tail: &EmpiricalTail, keep: impl Fn(&TailProbe) -> bool) -> EmpiricalTail {
    EmpiricalTail { probes: tail.probes.iter().filter(|p| keep(p)).cloned().collect(), ..tail.clone() }
}

/// [`estimate_tail`] for an `n`-independent distribution.
pub fn estimate_tail_dist(
    spec: &DistSpec,
    size: &SizeSequence,
    grid: &ProbeGrid,
    seed: u64,
) -> Result<EmpiricalTail, VerifyError> {
    spec.validate()?;
    let digest = crate::cert::digest_json(spec);
    estimate_tail(&|_, rng: &mut Rng| spec.draw(rng), size, grid, seed, &digest)
}

/// Probes filled from a closed-form tail `p(n, threshold)` where
/// `threshold = t·yₙ`.
pub fn exact_tail<P>(
    n_grid: &[u64],
    t_grid: &[f64],
    size: &SizeSequence,
    p: P,
    oracle_name: &str,
) -> Result<EmpiricalTail, VerifyError>
where
    P: Fn(u64, f64) -> f64,
{
    if n_grid.is_empty() || t_grid.is_empty() {
        return Err(VerifyError::BadGrid("empty grid".into()));
    }
    let mut probes = Vec::new();
    for &n in n_grid {
        let y = size.eval(n)?;
        for &t in t_grid {
            probes.push(TailProbe { n, t, trials: 0, exceedances: 0, ucb: p(n, t * y).clamp(0.0, 1.0), size_value: y });
        }
    }
    Ok(EmpiricalTail {
        probes,
        sampler_digest: oracle_name.to_string(),
        joint: false,
        delta: 0.0,
        seed: 0,
        kind: ProbeKind::Exact,
        side: Side::Upper,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    /// `min log(bound) − log(ucb)` over in-domain probes.
    #[serde(with = "crate::float")]
    pub worst_slack: f64,
    /// Probe attaining the worst slack.
    pub witness: Option<TailProbe>,
    pub checked: usize,
    pub skipped: usize,
    pub fitted: BTreeMap<String, f64>,
}

fn slack(log_bound: f64, ucb: f64) -> f64 {
    if ucb <= 0.0 {
        f64::INFINITY
    } else {
        log_bound - ucb.ln()
    }
}

fn verdict_from<I>(rows: I) -> Result<Verdict, VerifyError>
where
    I: Iterator<Item = (Option<f64>, TailProbe)>,
{
    let (mut checked, mut skipped) = (0, 0);
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for (s, probe) in rows {
        match s {
            None => skipped += 1,
            Some(s) => {
                checked += 1;
                if s < worst || witness.is_none() {
                    worst = s.min(worst);
                    witness = Some(probe);
                }
            }
        }
    }
    if checked == 0 {
        return Err(VerifyError::NoInDomainProbes);
    }
    Ok(Verdict { pass: worst >= 0.0, worst_slack: worst, witness, checked, skipped, fitted: BTreeMap::new() })
}

/// Pass iff `ucb ≤ C1·exp(−rₙf(t))` at every probe in the certificate's domain.
pub fn check_certificate(cert: &TailCertificate, tail: &EmpiricalTail) -> Result<Verdict, VerifyError> {
    if !cert.is_concrete() {
        return Err(VerifyError::SymbolicConstants(cert.f().symbols().into_iter().collect()));
    }
    if tail.side != Side::Upper {
        return Err(VerifyError::BadGrid("upper certificate needs upper-tail probes".into()));
    }
    let rows = tail
        .probes
        .iter()
        .map(|p| -> Result<_, VerifyError> {
            Ok(if cert.in_domain(p.n, p.t)? {
                (Some(slack(cert.log_bound(p.n, p.t)?, p.ucb)), p.clone())
            } else {
                (None, p.clone())
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    verdict_from(rows.into_iter())
}

/// Lower-tail analogue over probes of `P(|X| ≤ t|Y|)`.
pub fn check_lower_certificate(
    cert: &LowerTailCertificate,
    tail: &EmpiricalTail,
) -> Result<Verdict, VerifyError> {
    if tail.side != Side::Lower {
        return Err(VerifyError::BadGrid("lower certificate needs lower-tail probes".into()));
    }
    let rows = tail
        .probes
        .iter()
        .map(|p| -> Result<_, VerifyError> {
            Ok(match cert.eval_bound(p.n, p.t) {
                Ok(b) => (Some(slack(b.ln(), p.ucb)), p.clone()),
                Err(crate::error::CertError::OutOfDomain(_)) => (None, p.clone()),
                Err(e) => return Err(e.into()),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    verdict_from(rows.into_iter())
}

/// Log-grid search bounds for symbolic constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSearch {
    pub lower: f64,
    pub upper: f64,
    pub per_decade: usize,
}

impl Default for FitSearch {
    fn default() -> Self {
        FitSearch { lower: 1e-4, upper: 1e2, per_decade: 64 }
    }
}

impl FitSearch {
    pub fn grid(&self) -> Vec<f64> {
        let decades = (self.upper / self.lower).log10();
        let count = (decades * self.per_decade as f64).round() as usize;
        (0..=count)
            .map(|i| self.lower * 10f64.powf(i as f64 / self.per_decade as f64))
            .collect()
    }
}

/// Concretize the symbolic constants of `shape` against `tail`.
///
/// Larger exponent constants give smaller bounds, so the passing set of each
/// constant is an initial segment of the grid. The fit returns the largest
/// passing assignment (the tightest certificate the data support); ties go to
/// the larger worst slack.
pub fn fit_constants(
    shape: &TailCertificate,
    tail: &EmpiricalTail,
    search: &FitSearch,
) -> Result<(TailCertificate, Verdict), VerifyError> {
    let names: Vec<String> = shape.f().symbols().into_iter().collect();
    let grid = search.grid();
    if grid.is_empty() || !(search.lower > 0.0) {
        return Err(VerifyError::BadGrid("empty constant search grid".into()));
    }
    if !tail.probes.iter().any(|p| shape.in_domain(p.n, p.t).unwrap_or(false)) {
        return Err(VerifyError::NoInDomainProbes);
    }
    let mut best: Option<(f64, TailCertificate, Verdict)> = None;
    let combos = grid.len().pow(names.len() as u32);
    for mut idx in 0..combos {
        let mut values = BTreeMap::new();
        let mut score = 0.0;
        for name in &names {
            let v = grid[idx % grid.len()];
            idx /= grid.len();
            score += v.ln();
            values.insert(name.clone(), v);
        }
        let cert = match shape.substitute(&values) {
            Ok(c) => c,
            Err(_) => continue,
        };
        let mut verdict = check_certificate(&cert, tail)?;
        if !verdict.pass {
            continue;
        }
        verdict.fitted = values;
        let better = match &best {
            None => true,
            Some((s, _, v)) => score > *s || (score == *s && verdict.worst_slack > v.worst_slack),
        };
        if better {
            best = Some((score, cert, verdict));
        }
    }
    best.map(|(_, c, v)| (c, v)).ok_or(VerifyError::Unsatisfiable)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
    pub distinct_n: usize,
    /// `slope ≥ 1 − tolerance`.
    pub calibrated: bool,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

/// Least squares of `−log p̂` against `rₙ·f(t)` over probes with at least
/// [`MIN_REGRESSION_EXCEEDANCES`] exceedances. Symbolic constants count as one.
pub fn rate_diagnostic(
    tail: &EmpiricalTail,
    cert: &TailCertificate,
    tolerance: f64,
) -> Result<RateFit, VerifyError> {
    let f = cert.f().with_unit_symbols();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ns = std::collections::BTreeSet::new();
    for p in &tail.probes {
        let usable = match tail.kind {
            ProbeKind::Exact => p.ucb > 0.0,
            ProbeKind::MonteCarlo => p.exceedances >= MIN_REGRESSION_EXCEEDANCES,
        };
        if !usable || p.t < cert.c2() || p.n < cert.n_threshold() {
            continue;
        }
        xs.push(cert.rate().eval(p.n)? * f.eval(p.t)?);
        ys.push(-p.frequency(tail.kind).ln());
        ns.insert(p.n);
    }
    if ns.len() < 3 || xs.len() < 3 {
        return Err(VerifyError::InsufficientExceedances(format!(
            "{} usable probes over {} indices",
            xs.len(),
            ns.len()
        )));
    }
    let (slope, intercept, r_squared) = ols(&xs, &ys);
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points: xs.len(),
        distinct_n: ns.len(),
        calibrated: slope >= 1.0 - tolerance,
        xs,
        ys,
    })
}

/// `(slope, intercept, R²)`.
pub fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, my, 0.0);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LittleOEntry {
    pub n: u64,
    /// `rₙ⁻¹·log(ucb)`, `-inf` when no replicate exceeded the threshold.
    #[serde(with = "crate::float")]
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LittleORecord {
    pub c: f64,
    pub entries: Vec<LittleOEntry>,
    pub decreasing: bool,
    #[serde(with = "crate::float")]
    pub threshold: f64,
    pub below_threshold: bool,
    pub divergent: bool,
}

/// Trend of `rₙ⁻¹·log P(|Xₙ| ≥ c|Yₙ|)` across the `n` grid, read at the probe
/// whose `t` is closest to `c`.
pub fn little_o_diagnostic(
    tail: &EmpiricalTail,
    c: f64,
    rate: &RateSequence,
    threshold: f64,
) -> Result<LittleORecord, VerifyError> {
    let mut by_n: BTreeMap<u64, &TailProbe> = BTreeMap::new();
    for p in &tail.probes {
        let e = by_n.entry(p.n).or_insert(p);
        if (p.t - c).abs() < (e.t - c).abs() {
            *e = p;
        }
    }
    let mut entries = Vec::new();
    for (n, p) in by_n {
        let zero = match tail.kind {
            ProbeKind::Exact => p.ucb <= 0.0,
            ProbeKind::MonteCarlo => p.exceedances == 0,
        };
        let value = if zero { f64::NEG_INFINITY } else { p.ucb.ln() / rate.eval(n)? };
        entries.push(LittleOEntry { n, value });
    }
    let decreasing = entries.windows(2).all(|w| w[1].value <= w[0].value);
    let below = entries.last().map(|e| e.value < threshold).unwrap_or(false);
    Ok(LittleORecord {
        c,
        decreasing,
        threshold,
        below_threshold: below,
        divergent: decreasing && below,
        entries,
    })
}

/// Flat CSV with columns `n,t,m,k,ucb,bound,slack`; bound and slack are empty
/// outside the certificate's domain.
pub fn to_csv(tail: &EmpiricalTail, cert: Option<&TailCertificate>) -> String {
    let mut out = String::from("n,t,m,k,ucb,bound,slack\n");
    for p in &tail.probes {
        let (bound, sl) = match cert.filter(|c| c.is_concrete()) {
            Some(c) if c.in_domain(p.n, p.t).unwrap_or(false) => match c.log_bound(p.n, p.t) {
                Ok(lb) => (format!("{:e}", lb.exp()), format!("{}", slack(lb, p.ucb))),
                Err(_) => (String::new(), String::new()),
            },
            _ => (String::new(), String::new()),
        };
        out.push_str(&format!("{},{},{},{},{:e},{},{}\n", p.n, p.t, p.trials, p.exceedances, p.ucb, bound, sl));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::gaussian_mean_cert;
    use crate::special::normal_two_sided_sf;

    fn zero_spec() -> DistSpec {
        DistSpec::DiscreteAtoms { values: vec![0.0], probs: vec![1.0] }
    }

    #[test]
    fn zero_variable_probes() {
        let grid = ProbeGrid::new(vec![1, 10], vec![0.5, 1.0], 1000);
        let tail = estimate_tail_dist(&zero_spec(), &SizeSequence::Const(1.0), &grid, 4).unwrap();
        for p in &tail.probes {
            assert_eq!(p.exceedances, 0);
            assert!((p.ucb - (1.0 - 0.01f64.powf(1e-3))).abs() < 1e-15);
        }
    }

    #[test]
    fn counts_monotone_in_t() {
        let grid = ProbeGrid::new(vec![5], (1..40).map(|i| i as f64 * 0.1).collect(), 5000);
        let spec = DistSpec::Gaussian { mean: 0.0, sd: 1.0 };
        let tail = estimate_tail_dist(&spec, &SizeSequence::Const(1.0), &grid, 11).unwrap();
        assert!(tail.probes.windows(2).all(|w| w[1].exceedances <= w[0].exceedances));
    }

    #[test]
    fn bad_grids() {
        let spec = zero_spec();
        let g = ProbeGrid::new(vec![], vec![1.0], 10);
        assert!(matches!(estimate_tail_dist(&spec, &SizeSequence::Const(1.0), &g, 0), Err(VerifyError::BadGrid(_))));
        let g = ProbeGrid::new(vec![1], vec![2.0, 1.0], 10);
        assert!(matches!(estimate_tail_dist(&spec, &SizeSequence::Const(1.0), &g, 0), Err(VerifyError::BadGrid(_))));
    }

    fn gaussian_exact(n_grid: &[u64]) -> (TailCertificate, EmpiricalTail) {
        let rate = RateSequence::LogN(1.0);
        let cert = gaussian_mean_cert(&rate).unwrap();
        let t_grid: Vec<f64> = (0..=50).map(|i| 1.0 + 0.1 * i as f64).collect();
        let tail = exact_tail(n_grid, &t_grid, cert.size(), |n, thr| normal_two_sided_sf(thr * (n as f64).sqrt()), "normal")
            .unwrap();
        (cert, tail)
    }

    #[test]
    fn gaussian_mean_exact_pass_and_halved_fail() {
        let (cert, tail) = gaussian_exact(&[100, 1000, 10_000]);
        let v = check_certificate(&cert, &tail).unwrap();
        assert!(v.pass && v.worst_slack > 0.0);
        // C1 = 0.01 breaks the bound at the smallest threshold
        let mut p = cert.to_parts();
        p.c1 = 0.01;
        let weak = p.build().unwrap();
        let v = check_certificate(&weak, &tail).unwrap();
        assert!(!v.pass);
        assert_eq!(v.witness.unwrap().t, 1.0);
    }

    #[test]
    fn fit_gaussian_constant() {
        let (cert, tail) = gaussian_exact(&[100, 1000, 10_000]);
        let mut p = cert.to_parts();
        p.f = crate::rate::RateFunction::power(crate::rate::Constant::symbol("c"), 2.0);
        let shape = p.build().unwrap();
        let (fitted, v) = fit_constants(&shape, &tail, &FitSearch::default()).unwrap();
        let c = v.fitted["c"];
        assert!(c >= 0.49, "{c}");
        assert!(fitted.is_concrete());
        let (_, v2) = fit_constants(&shape, &tail, &FitSearch::default()).unwrap();
        assert_eq!(v2.fitted, v.fitted);
    }

    #[test]
    fn rate_diagnostic_gaussian_slope() {
        let cert = gaussian_mean_cert(&RateSequence::LogN(1.0)).unwrap();
        let n_grid = [100u64, 1000, 10_000, 100_000];
        let tail = exact_tail(&n_grid, &[3.0], cert.size(), |n, thr| normal_two_sided_sf(thr * (n as f64).sqrt()), "normal").unwrap();
        let fit = rate_diagnostic(&tail, &cert, 0.05).unwrap();
        assert!(fit.slope >= 1.0, "{}", fit.slope);
        let single = exact_tail(&[100], &[3.0], cert.size(), |_, _| 0.1, "x").unwrap();
        assert!(matches!(rate_diagnostic(&single, &cert, 0.05), Err(VerifyError::InsufficientExceedances(_))));
    }

    #[test]
    fn little_o_cases() {
        let rate = RateSequence::LogN(1.0);
        let z = exact_tail(&[10, 100, 1000], &[0.5], &SizeSequence::Const(1.0), |_, _| 0.0, "zero").unwrap();
        let rec = little_o_diagnostic(&z, 0.5, &rate, -1.0).unwrap();
        assert!(rec.entries.iter().all(|e| e.value == f64::NEG_INFINITY));
        let one = exact_tail(&[10, 100, 1000], &[0.5], &SizeSequence::Const(1.0), |_, thr| if thr <= 1.0 { 1.0 } else { 0.0 }, "one")
            .unwrap();
        let rec = little_o_diagnostic(&one, 0.5, &rate, -1.0).unwrap();
        assert!(!rec.divergent);
        assert!(rec.entries.iter().all(|e| e.value == 0.0));
    }

    #[test]
    fn csv_rows() {
        let (cert, tail) = gaussian_exact(&[100]);
        let csv = to_csv(&tail, Some(&cert));
        assert_eq!(csv.lines().count(), tail.probes.len() + 1);
        assert!(csv.starts_with("n,t,m,k,ucb,bound,slack"));
    }
}
