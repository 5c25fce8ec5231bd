//! Finite discrete laws with exact tail enumeration, used as oracles for the
//! combinators.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::cert::{CertificateParts, Provenance, TailCertificate};
use crate::error::CertError;
use crate::rate::RateFunction;
use crate::sequence::{RateSequence, SizeSequence};

/// Atoms `(value, probability)`; probabilities sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteLaw {
    pub atoms: Vec<(f64, f64)>,
}

impl DiscreteLaw {
    pub fn new(atoms: Vec<(f64, f64)>) -> Self {
        let mut law = DiscreteLaw { atoms };
        law.merge();
        law
    }

    pub fn point(x: f64) -> Self {
        DiscreteLaw { atoms: vec![(x, 1.0)] }
    }

    /// Random law with `k` atoms in `[−scale, scale]`.
    pub fn random(rng: &mut impl rand::Rng, k: usize, scale: f64) -> Self {
        let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
        let s: f64 = w.iter().sum();
        DiscreteLaw::new(w.iter().map(|wi| (rng.gen_range(-scale..scale), wi / s)).collect())
    }

    fn merge(&mut self) {
        self.atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(self.atoms.len());
        for &(v, p) in &self.atoms {
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 += p,
                _ => out.push((v, p)),
            }
        }
        self.atoms = out;
    }

    /// `P(|X| ≥ s)`.
    pub fn abs_tail(&self, s: f64) -> f64 {
        self.atoms.iter().filter(|(v, _)| v.abs() >= s).map(|(_, p)| p).sum::<f64>().min(1.0)
    }

    /// Law of `X + W` for independent `X`, `W`.
    pub fn add_independent(&self, other: &DiscreteLaw) -> DiscreteLaw {
        self.combine(other, |a, b| a + b)
    }

    /// Law of `X·W` for independent `X`, `W`.
    pub fn mul_independent(&self, other: &DiscreteLaw) -> DiscreteLaw {
        self.combine(other, |a, b| a * b)
    }

    fn combine(&self, other: &DiscreteLaw, op: impl Fn(f64, f64) -> f64) -> DiscreteLaw {
        let mut atoms = Vec::with_capacity(self.atoms.len() * other.atoms.len());
        for &(a, p) in &self.atoms {
            for &(b, q) in &other.atoms {
                atoms.push((op(a, b), p * q));
            }
        }
        DiscreteLaw::new(atoms)
    }

    /// Law of `|X|^alpha`.
    pub fn abs_pow(&self, alpha: f64) -> DiscreteLaw {
        DiscreteLaw::new(self.atoms.iter().map(|&(v, p)| (v.abs().powf(alpha), p)).collect())
    }

    /// `P(max of m iid copies of |X| ≥ s) = 1 − (1 − P(|X| ≥ s))^m`.
    pub fn iid_max_abs_tail(&self, m: u64, s: f64) -> f64 {
        -f64::exp_m1(m as f64 * f64::ln_1p(-self.abs_tail(s).min(1.0)))
    }

    /// `E|X|^p`.
    pub fn abs_moment(&self, p: f64) -> f64 {
        self.atoms.iter().map(|(v, q)| q * v.abs().powf(p)).sum()
    }

    /// Breakpoints `|x|/y` of the tail function.
    pub fn ratios(&self, y: f64) -> Vec<f64> {
        self.atoms.iter().map(|(v, _)| v.abs() / y).collect()
    }
}

/// Smallest `C1` making `C1·exp(−r·f(t)) ≥ P(|X| ≥ t·y)` for every `t ≥ c2`.
///
/// The tail is a left-continuous step function, so the supremum of
/// `P(|X| ≥ t·y)·e^{r f(t)}` over `t ≥ c2` is attained at `c2` or at a
/// breakpoint `|x|/y ≥ c2`.
pub fn tight_c1(law: &DiscreteLaw, y: f64, r: f64, f: &RateFunction, c2: f64) -> Result<f64, CertError> {
    let mut best: f64 = 0.0;
    let ratios = law.ratios(y);
    let mut candidates = ratios.clone();
    candidates.push(c2);
    for s in candidates.into_iter().filter(|s| *s >= c2 && s.is_finite()) {
        // compare in ratio space so the atom defining the breakpoint is counted
        let p: f64 = ratios.iter().zip(&law.atoms).filter(|(r, _)| **r >= s).map(|(_, a)| a.1).sum();
        if p > 0.0 {
            best = best.max(p.min(1.0) * (r * f.eval(s)?).exp());
        }
    }
    // zero tails still need a positive constant
    Ok(if best > 0.0 { best * (1.0 + 1e-9) } else { 1e-12 })
}

/// Certificate with constant rate `r` that is exactly valid for `(X, y)` at every `n`.
pub fn tight_certificate(
    law: &DiscreteLaw,
    y: f64,
    r: f64,
    f: RateFunction,
    c2: f64,
) -> Result<TailCertificate, CertError> {
    let c1 = tight_c1(law, y, r, &f, c2)?;
    CertificateParts::new(SizeSequence::Const(y), RateSequence::Const(r), c1, c2, f, Provenance::leaf("tight_certificate"))
        .build()
}

/// Random rate function from the closed family with its domain start.
pub fn random_rate_function(rng: &mut impl rand::Rng) -> (RateFunction, f64) {
    match rng.gen_range(0..4) {
        0 => (RateFunction::Log, std::f64::consts::E),
        1 => (RateFunction::linear(rng.gen_range(0.2..2.0)), rng.gen_range(0.5..2.0)),
        2 => (RateFunction::power(rng.gen_range(0.1..1.0), rng.gen_range(0.5..2.0)), rng.gen_range(0.5..2.0)),
        _ => (RateFunction::linear_capped(rng.gen_range(0.2..2.0)), rng.gen_range(0.5..2.0)),
    }
}

/// Thresholds `c2·1.1^k`, `k = 0..=30`.
pub fn soundness_grid(c2: f64) -> Vec<f64> {
    (0..=30).map(|k| c2 * 1.1f64.powi(k)).collect()
}


/// Outcome of [`soundness_suite`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SoundnessReport {
    pub instances: usize,
    pub checks: usize,
    pub violations: Vec<String>,
}

fn check_law(
    report: &mut SoundnessReport,
    label: &str,
    cert: &TailCertificate,
    n: u64,
    tail: impl Fn(f64) -> f64,
) -> Result<(), CertError> {
    let y = cert.size().eval(n)?;
    for t in soundness_grid(cert.c2()) {
        if !cert.in_domain(n, t)? {
            continue;
        }
        report.checks += 1;
        let exact = tail(t * y);
        let bound = cert.eval_bound(n, t)?;
        if exact > bound * (1.0 + 1e-9) {
            report.violations.push(format!("{label}: n={n} t={t} exact={exact} bound={bound} cert={}", cert.to_json()));
        }
    }
    Ok(())
}

/// Randomized soundness check of `add`, `multiply`, `power_transform`,
/// `truncate` and `finite_max` against exactly enumerated tails of discrete
/// laws with at most `max_atoms` atoms.
pub fn soundness_suite(instances: usize, max_atoms: usize, seed: u64) -> Result<SoundnessReport, CertError> {
    use crate::algebra;
    use crate::cert::{DominationEvidence, IndexFamily, UniformCertificate};
    use crate::sequence::{EvalRange, ProbSequence};

    let mut report = SoundnessReport { instances, ..Default::default() };
    let tag = crate::rng::tag("soundness");
    for i in 0..instances as u64 {
        let mut rng = crate::rng::substream(seed, tag, i);
        let k1 = rng.gen_range(1..=max_atoms);
        let k2 = rng.gen_range(1..=max_atoms);
        let x = DiscreteLaw::random(&mut rng, k1, 5.0);
        let w = DiscreteLaw::random(&mut rng, k2, 5.0);
        let (fx, cx) = random_rate_function(&mut rng);
        let (fw, cw) = random_rate_function(&mut rng);
        let (rx, rw) = (rng.gen_range(0.5..4.0), rng.gen_range(0.5..4.0));
        let (yx, yw) = (rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0));
        let a = tight_certificate(&x, yx, rx, fx, cx)?;
        let b = tight_certificate(&w, yw, rw, fw, cw)?;

        let sum = x.add_independent(&w);
        check_law(&mut report, &format!("add#{i}"), &algebra::add(&a, &b)?, 1, |s| sum.abs_tail(s))?;
        let prod = x.mul_independent(&w);
        check_law(&mut report, &format!("multiply#{i}"), &algebra::multiply(&a, &b)?, 1, |s| prod.abs_tail(s))?;
        let alpha = rng.gen_range(0.3..3.0);
        let powed = x.abs_pow(alpha);
        check_law(&mut report, &format!("power#{i}"), &algebra::power_transform(&a, alpha)?, 1, |s| powed.abs_tail(s))?;

        // |X| = |X̂|·U with U ∈ [0, 1] independent: domination almost surely
        let u = DiscreteLaw::new(vec![(rng.gen_range(0.0..1.0), 0.5), (1.0, 0.5)]);
        let shrunk = x.mul_independent(&u);
        let dom = DominationEvidence { p: ProbSequence::Zero, rate: a.rate().clone() };
        let range = EvalRange::new(1, 200, 8);
        let tr = algebra::truncate(&a, &dom, &range)?;
        check_law(&mut report, &format!("truncate#{i}"), &tr, 1, |s| shrunk.abs_tail(s))?;

        // Xₙ = X̂ except on an event of probability qₙ = exp(−g·n) where it jumps to `big`
        let g = rng.gen_range(0.2..2.0);
        let big = 1e3;
        let dom = DominationEvidence {
            p: ProbSequence::ExpNeg(crate::sequence::SizeSequence::Monomial { c: g, a: 1.0, b: 0.0 }),
            rate: a.rate().clone(),
        };
        if let Ok(tr) = algebra::truncate(&a, &dom, &range) {
            for n in [tr.n_threshold(), tr.n_threshold() + 3, 2 * tr.n_threshold() + 10] {
                let q = (-g * n as f64).exp();
                check_law(&mut report, &format!("truncate-hat#{i}"), &tr, n, |s| {
                    (1.0 - q) * x.abs_tail(s) + if big >= s { q } else { 0.0 }
                })?;
            }
        }

        let m = rng.gen_range(2..=50u64);
        let kappa = (m as f64).ln() / rx * rng.gen_range(1.0..2.0);
        let family = IndexFamily { description: format!("{m} iid copies"), cardinality: crate::sequence::SizeSequence::Const(m as f64) };
        let uni = UniformCertificate::from_shared(&a, family);
        match algebra::finite_max(&uni, kappa, &range) {
            Ok(fm) => check_law(&mut report, &format!("finite_max#{i}"), &fm, 1, |s| x.iid_max_abs_tail(m, s))?,
            Err(CertError::CardinalityTooLarge(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}
