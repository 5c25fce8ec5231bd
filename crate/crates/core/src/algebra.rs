//! Combinators on certificates. Each output claim follows from an inclusion of
//! events between the inputs' exceptional sets plus a union bound.

use crate::cert::{
    CertificateParts, ConstantsStatus, DominationEvidence, Flavor, IndexRates, IndexSizes,
    LowerTailCertificate, Provenance, SmallnessWitness, Direction, TailCertificate,
    ThetaCertificate, UniformCertificate,
};
use crate::error::CertError;
use crate::rate::RateFunction;
use crate::sequence::{EvalRange, Modulus, ProbSequence, RateSequence, SizeSequence, Table};

/// `C1·exp(−rₙ·f(t))`.
pub fn eval_bound(cert: &TailCertificate, n: u64, t: f64) -> Result<f64, CertError> {
    cert.eval_bound(n, t)
}

fn combine_flavor(a: &TailCertificate, b: &TailCertificate) -> (Flavor, Option<SizeSequence>) {
    if a.flavor == Flavor::O && b.flavor == Flavor::O {
        return (Flavor::O, None);
    }
    let ceilings: Vec<SizeSequence> = [&a.ceiling, &b.ceiling]
        .into_iter()
        .flatten()
        .cloned()
        .collect();
    (Flavor::OHat, Some(SizeSequence::min(ceilings)))
}

fn parts(
    size: SizeSequence,
    rate: RateSequence,
    c1: f64,
    c2: f64,
    n_threshold: u64,
    f: RateFunction,
    flavor: (Flavor, Option<SizeSequence>),
    provenance: Provenance,
) -> CertificateParts {
    CertificateParts {
        size,
        rate,
        c1,
        c2,
        n_threshold,
        f,
        flavor: flavor.0,
        ceiling: flavor.1,
        constants_status: ConstantsStatus::Concrete,
        provenance,
    }
}

/// Certificate for `Xₙ + Wₙ` at size `|Yₙ| + |Zₙ|` and rate `rₙ ∧ sₙ`.
///
/// `{|X+W| ≥ t(|Y|+|Z|)} ⊆ {|X| ≥ t|Y|} ∪ {|W| ≥ t|Z|}`.
pub fn add(a: &TailCertificate, b: &TailCertificate) -> Result<TailCertificate, CertError> {
    parts(
        SizeSequence::sum(vec![a.size.clone(), b.size.clone()]),
        RateSequence::min(a.rate.clone(), b.rate.clone()),
        a.c1 + b.c1,
        a.c2.max(b.c2),
        a.n_threshold.max(b.n_threshold),
        a.f.clone().min(b.f.clone()),
        combine_flavor(a, b),
        Provenance::from_children("add", &[a, b]),
    )
    .build()
}

/// Certificate for `Xₙ·Wₙ` at size `Yₙ·Zₙ` and rate `rₙ ∧ sₙ`.
///
/// `{|XW| ≥ t|YZ|} ⊆ {|X| ≥ √t|Y|} ∪ {|W| ≥ √t|Z|}`, so the threshold squares
/// and the rate function is evaluated at `√t`.
pub fn multiply(a: &TailCertificate, b: &TailCertificate) -> Result<TailCertificate, CertError> {
    let (flavor, ceiling) = combine_flavor(a, b);
    let c2 = a.c2.max(b.c2);
    parts(
        SizeSequence::product(vec![a.size.clone(), b.size.clone()]),
        RateSequence::min(a.rate.clone(), b.rate.clone()),
        a.c1 + b.c1,
        c2 * c2,
        a.n_threshold.max(b.n_threshold),
        a.f.clone().min(b.f.clone()).arg_power(0.5),
        (flavor, ceiling.map(|c| c.pow(2.0))),
        Provenance::from_children("multiply", &[a, b]),
    )
    .build()
}

/// Certificate for `|Xₙ|^α` at size `|Yₙ|^α`.
pub fn power_transform(cert: &TailCertificate, alpha: f64) -> Result<TailCertificate, CertError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(CertError::NonPositiveAlpha(alpha));
    }
    if alpha == 1.0 {
        return Ok(cert.clone());
    }
    parts(
        cert.size.clone().pow(alpha),
        cert.rate.clone(),
        cert.c1,
        cert.c2.powf(alpha),
        cert.n_threshold,
        cert.f.clone().arg_power(1.0 / alpha),
        (cert.flavor, cert.ceiling.clone().map(|c| c.pow(alpha))),
        Provenance::from_children("power_transform", &[cert]).with_note(format!("alpha={alpha}")),
    )
    .build()
}

/// Witness for `g(Xₙ)` when `Xₙ = ô_P(1; rₙ)` and `|g(x)| ≤ ω(|x|)` near zero:
/// `wₙ' = ω(C·wₙ)` where `C` is the threshold constant of the input.
pub fn continuous_transform_o(
    witness: &SmallnessWitness,
    modulus: &Modulus,
    threshold: f64,
) -> Result<SmallnessWitness, CertError> {
    if witness.direction != Direction::ToZero {
        return Err(CertError::Invalid("continuous transform needs a witness tending to zero".into()));
    }
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(CertError::Invalid(format!("threshold must be positive, got {threshold}")));
    }
    check_modulus(modulus)?;
    if *modulus == Modulus::IDENTITY && threshold == 1.0 {
        return Ok(witness.clone());
    }
    Ok(SmallnessWitness {
        w: SizeSequence::Modulus {
            modulus: modulus.clone(),
            inner: Box::new(SizeSequence::product(vec![
                SizeSequence::Const(threshold),
                witness.w.clone(),
            ])),
        },
        direction: Direction::ToZero,
    })
}

fn check_modulus(modulus: &Modulus) -> Result<(), CertError> {
    if modulus.eval(0.0) != 0.0 {
        return Err(CertError::BadModulus(format!("ω(0) = {}", modulus.eval(0.0))));
    }
    let mut prev = f64::INFINITY;
    for k in 1..=12 {
        let delta = 10f64.powi(-k);
        let w = modulus.eval(delta);
        if !(w.is_finite() && w >= 0.0) || w > prev {
            return Err(CertError::BadModulus(format!("ω({delta}) = {w} does not shrink")));
        }
        prev = w;
    }
    if prev > 1e-6 {
        return Err(CertError::BadModulus(format!("ω(1e-12) = {prev}")));
    }
    Ok(())
}

/// Certificate for `Xₙ` from one for a dominating `X̂ₙ` and evidence that
/// `pₙ = P(|Xₙ| ≥ |X̂ₙ|)` is negligible at rate `rₙ`.
///
/// For `n ≥ N'` and `C2 ≤ t ≤ Rₙ'`, `pₙ ≤ exp(−rₙ·f(t))` holds, giving the
/// constant `C1 + 1`. `N'` is the first index after which the evidence stays
/// above `f(C2)` on `range`, and `Rₙ' = sup{t : f(t) ≤ −log(pₙ)/rₙ}` is
/// tabulated on the range grid.
pub fn truncate(
    hat: &TailCertificate,
    dom: &DominationEvidence,
    range: &EvalRange,
) -> Result<TailCertificate, CertError> {
    if dom.rate != hat.rate {
        return Err(CertError::MismatchedSizeOrRate);
    }
    let mut out = hat.to_parts();
    out.c1 = hat.c1 + 1.0;
    out.provenance = Provenance::from_children("truncate", &[hat]);
    if dom.p == ProbSequence::Zero {
        out.provenance = out.provenance.with_note("domination holds almost surely");
        return out.build();
    }
    hat.ensure_concrete()?;
    let floor = hat.f.eval(hat.c2)?;
    let start = hat.n_threshold.max(range.start);
    if start > range.end {
        return Err(CertError::DominationTooWeak("empty probe range".into()));
    }
    // Scan every index once: the last failure fixes N'.
    let mut last_fail = None;
    let mut ratios = Vec::with_capacity((range.end - start + 1) as usize);
    for n in start..=range.end {
        let r = dom.exponent_ratio(n)?;
        if !(r >= floor) {
            last_fail = Some(n);
        }
        ratios.push(r);
    }
    let n_new = match last_fail {
        None => start,
        Some(n) if n < range.end => n + 1,
        Some(_) => {
            return Err(CertError::DominationTooWeak(format!(
                "−log(pₙ)/rₙ stays below f(C2) = {floor} up to n = {}",
                range.end
            )))
        }
    };
    let tail = &ratios[(n_new - start) as usize..];
    if tail.last().copied().unwrap_or(0.0) <= tail[0] && tail.len() > 1 && tail[0].is_finite() {
        return Err(CertError::DominationTooWeak(
            "−log(pₙ)/rₙ does not grow over the probe range".into(),
        ));
    }
    // Tabulate the ceiling at grid keys with the minimum ratio up to the next key.
    let mut keys: Vec<u64> = range.grid().into_iter().filter(|&n| n >= n_new).collect();
    if keys.first() != Some(&n_new) {
        keys.insert(0, n_new);
    }
    let mut table = Table::default();
    for (i, &k) in keys.iter().enumerate() {
        let next = keys.get(i + 1).copied().unwrap_or(range.end + 1);
        let lo = (k - start) as usize;
        let hi = ((next - start) as usize).min(ratios.len());
        let min_ratio = ratios[lo..hi].iter().cloned().fold(f64::INFINITY, f64::min);
        let r = match hat.f.last_below(min_ratio, hat.c2)? {
            Some(r) if r.is_finite() => r,
            Some(_) => 1e300,
            None => hat.c2,
        };
        let r = match &hat.ceiling {
            Some(c) => r.min(c.eval(k)?),
            None => r,
        };
        table.0.insert(k, r);
    }
    out.n_threshold = n_new;
    out.flavor = Flavor::OHat;
    out.ceiling = Some(SizeSequence::Custom(table));
    out.provenance = out
        .provenance
        .with_note(format!("domination threshold N={n_new} on range up to {}", range.end));
    out.build()
}

/// Coerce a ceilinged certificate to flavor `O` valid from `n = 1`, given the
/// caller's assertion that `P(Yₙ = 0) = 0` for all `n`.
///
/// The numeric constants are kept; the provenance records that the small-`n`
/// constants are absorbed by taking the maximum over `n < N`.
pub fn strengthen_to_all_n(
    cert: &TailCertificate,
    size_never_zero: bool,
) -> Result<TailCertificate, CertError> {
    if !size_never_zero {
        return Err(CertError::MissingAssertion);
    }
    if cert.flavor == Flavor::O && cert.n_threshold == 1 {
        return Ok(cert.clone());
    }
    let mut out = cert.to_parts();
    out.flavor = Flavor::O;
    out.ceiling = None;
    out.n_threshold = 1;
    out.provenance = Provenance::from_children("strengthen_to_all_n", &[cert]).with_note(format!(
        "coerced from {:?} with N={}; constants for n < N absorbed via C' = max over n < N of C'_n",
        cert.flavor, cert.n_threshold
    ));
    out.build()
}

/// Certificate for `max_λ |X_{nλ}|` at size `max_λ |Y_{nλ}|`, given
/// `log|Λₙ| ≤ kappa·rₙ` on `range`.
///
/// Union bound: `|Λₙ|·C1·exp(−rₙ f(t)) ≤ C1·exp(−rₙ (f(t) − kappa))`, and the
/// new threshold is the first `t ≥ C2` with `f(t) ≥ kappa + 1`.
pub fn finite_max(
    u: &UniformCertificate,
    kappa: f64,
    range: &EvalRange,
) -> Result<TailCertificate, CertError> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(CertError::Invalid(format!("kappa must be >= 0, got {kappa}")));
    }
    let rate = match &u.rates {
        IndexRates::Shared(r) => r.clone(),
        IndexRates::PerIndex(_) => {
            return Err(CertError::Invalid("finite_max requires a shared rate".into()))
        }
    };
    let grid_range = EvalRange::new(range.start.max(u.n_threshold), range.end, range.points);
    for n in grid_range.grid() {
        let card = u.index_family.cardinality.eval(n)?;
        let r = rate.eval(n)?;
        if card.ln() > kappa * r * (1.0 + 1e-12) {
            return Err(CertError::CardinalityTooLarge(format!(
                "log|Λ| = {} exceeds kappa·rₙ = {} at n={n}",
                card.ln(),
                kappa * r
            )));
        }
    }
    let c2_new = u.f.threshold_at_least(kappa + 1.0, u.c2)?.ok_or_else(|| {
        CertError::CardinalityTooLarge(format!("f never reaches kappa + 1 = {}", kappa + 1.0))
    })?;
    let size = match &u.sizes {
        IndexSizes::Shared(s) => s.clone(),
        IndexSizes::PerIndex(v) => SizeSequence::max(v.clone()),
    };
    let mut prov = u.provenance.clone();
    prov = Provenance {
        operation: "finite_max".into(),
        notes: vec![format!("kappa={kappa}; index family: {}", u.index_family.description)],
        children: vec![crate::cert::ProvenanceChild {
            digest: crate::cert::digest_json(u),
            provenance: prov,
        }],
    };
    CertificateParts {
        size,
        rate,
        c1: u.c1,
        c2: c2_new,
        n_threshold: u.n_threshold,
        f: u.f.clone().shifted(kappa),
        flavor: u.flavor,
        ceiling: u.ceiling.clone(),
        constants_status: ConstantsStatus::Concrete,
        provenance: prov,
    }
    .build()
}

/// Second input to [`covering_supremum`]: the variable `Mₙ` in the
/// self-bounding Lipschitz condition.
#[derive(Debug, Clone, PartialEq)]
pub enum LipschitzTerm {
    /// `Mₙ ≡ 0`, as for quadratic forms with `εₙ ≤ 1/4`.
    Zero,
    Certified(TailCertificate),
}

/// Certificate for `sup_{u ∈ Sₙ} |Xₙ(u)|` from a uniform certificate on an
/// `εₙ`-net, the cardinality bound `log|Nₙ| ≤ kappa·rₙ`, and the Lipschitz term.
///
/// On the event that both the net maximum and `Mₙ` are below their `t`-level
/// thresholds, the supremum is below `2t(|Yₙ| + εₙ|Zₙ|)`.
pub fn covering_supremum(
    net_cert: &UniformCertificate,
    kappa: f64,
    lip: &LipschitzTerm,
    eps: &SizeSequence,
    self_bounding_asserted: bool,
    range: &EvalRange,
) -> Result<TailCertificate, CertError> {
    if !self_bounding_asserted {
        return Err(CertError::MissingLipschitzAssertion);
    }
    let net_max = finite_max(net_cert, kappa, range)?;
    let double = |c: Option<SizeSequence>| {
        c.map(|c| SizeSequence::product(vec![SizeSequence::Const(2.0), c]))
    };
    let out = match lip {
        LipschitzTerm::Zero => CertificateParts {
            size: net_max.size.clone(),
            rate: net_max.rate.clone(),
            c1: net_max.c1,
            c2: 2.0 * net_max.c2,
            n_threshold: net_max.n_threshold,
            f: net_max.f.clone().rescaled(2.0),
            flavor: net_max.flavor,
            ceiling: double(net_max.ceiling.clone()),
            constants_status: ConstantsStatus::Concrete,
            provenance: Provenance::from_children("covering_supremum", &[&net_max])
                .with_note("Lipschitz term M ≡ 0"),
        },
        LipschitzTerm::Certified(m) => {
            let (flavor, ceiling) = combine_flavor(&net_max, m);
            CertificateParts {
                size: SizeSequence::sum(vec![
                    net_max.size.clone(),
                    SizeSequence::product(vec![eps.clone(), m.size.clone()]),
                ]),
                rate: RateSequence::min(net_max.rate.clone(), m.rate.clone()),
                c1: 2.0 * net_max.c1.max(m.c1),
                c2: 2.0 * net_max.c2.max(m.c2),
                n_threshold: net_max.n_threshold.max(m.n_threshold),
                f: net_max.f.clone().min(m.f.clone()).rescaled(2.0),
                flavor,
                ceiling: double(ceiling),
                constants_status: ConstantsStatus::Concrete,
                provenance: Provenance::from_children("covering_supremum", &[&net_max, m]),
            }
        }
    };
    out.build()
}

/// Bundle an upper and a lower certificate into a `Θ` certificate.
pub fn theta_pair(
    upper: &TailCertificate,
    lower: &LowerTailCertificate,
) -> Result<ThetaCertificate, CertError> {
    if upper.size != lower.size || upper.rate != lower.rate {
        return Err(CertError::MismatchedSizeOrRate);
    }
    Ok(ThetaCertificate {
        upper: upper.clone(),
        lower: lower.clone(),
    })
}
