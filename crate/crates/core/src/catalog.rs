//! Certificate constructors for standard distributional hypotheses.

use serde::{Deserialize, Serialize};
use std::f64::consts::E;

use crate::cert::{CertificateParts, Provenance, TailCertificate};
use crate::error::CertError;
use crate::rate::{Constant, RateFunction};
use crate::sequence::{Dimension, EvalRange, RateSequence, SizeSequence};

/// `E^{1/rₙ}|Xₙ|^{rₙ} ≤ Yₙ` with moment order `rₙ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentHypothesis {
    pub order: RateSequence,
    pub bound: SizeSequence,
}

/// `‖X‖_{ψα} ≤ norm_bound`, per coordinate for vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiNormHypothesis {
    pub alpha: f64,
    pub norm_bound: f64,
    #[serde(default)]
    pub per_coordinate: bool,
    #[serde(default)]
    pub dimension: Option<Dimension>,
}

fn markov(size: SizeSequence, rate: RateSequence, op: &str) -> Result<TailCertificate, CertError> {
    CertificateParts::new(size, rate, 1.0, E, RateFunction::Log, Provenance::leaf(op)).build()
}

fn check_order(order: &RateSequence, range: &EvalRange) -> Result<(), CertError> {
    for n in range.grid() {
        let r = order.eval(n)?;
        if r < 1.0 {
            return Err(CertError::RateBelowOne(format!("r = {r} at n = {n}")));
        }
    }
    Ok(())
}

/// Markov's inequality at moment order `rₙ`: `P(|X| ≥ tY) ≤ t^{−rₙ}`.
pub fn from_moment_bound(h: &MomentHypothesis) -> Result<TailCertificate, CertError> {
    markov(h.bound.clone(), h.order.clone(), "from_moment_bound")
}

/// `‖Xₙ‖_{rₙ}` for `n` coordinates each satisfying `h`.
pub fn lp_norm_cert(h: &MomentHypothesis) -> Result<TailCertificate, CertError> {
    markov(
        SizeSequence::product(vec![SizeSequence::NthRoot(h.order.clone()), h.bound.clone()]),
        h.order.clone(),
        "lp_norm_cert",
    )
}

/// `‖Xₙ‖_∞` when `rₙ ≥ c·log n` on `range`, using `n^{1/rₙ} ≤ e^{1/c}`.
pub fn linf_norm_cert(
    h: &MomentHypothesis,
    c: f64,
    range: &EvalRange,
) -> Result<TailCertificate, CertError> {
    check_log_growth(&h.order, c, range)?;
    markov(
        SizeSequence::product(vec![SizeSequence::Const((1.0 / c).exp()), h.bound.clone()]),
        h.order.clone(),
        "linf_norm_cert",
    )
    .map(|k| with_note(k, format!("r_n >= {c} log n")))
}

fn check_log_growth(rate: &RateSequence, c: f64, range: &EvalRange) -> Result<(), CertError> {
    if !(c > 0.0) {
        return Err(CertError::RateTooSmall(format!("c must be positive, got {c}")));
    }
    for n in range.grid() {
        let r = rate.eval(n)?;
        let need = c * (n as f64).ln();
        if r < need * (1.0 - 1e-12) {
            return Err(CertError::RateTooSmall(format!("r = {r} < c log n = {need} at n = {n}")));
        }
    }
    Ok(())
}

fn with_note(cert: TailCertificate, note: String) -> TailCertificate {
    let mut p = cert.to_parts();
    p.provenance = p.provenance.with_note(note);
    p.build().expect("note does not change validity")
}

fn psi_size(h: &PsiNormHypothesis, rate: &RateSequence) -> Result<SizeSequence, CertError> {
    if !(h.alpha >= 1.0) {
        return Err(CertError::BadAlpha(h.alpha));
    }
    if !(h.norm_bound > 0.0) {
        return Err(CertError::Invalid(format!("norm bound must be positive, got {}", h.norm_bound)));
    }
    Ok(SizeSequence::product(vec![
        SizeSequence::Const(h.norm_bound),
        SizeSequence::PowerOfRate { rate: rate.clone(), gamma: 1.0 / h.alpha },
    ]))
}

/// `P(|X| ≥ t·‖X‖_{ψα}·rₙ^{1/α}) ≤ t^{−rₙ}` from the moment bound at order `rₙ ≥ 1`.
pub fn from_psi_norm(
    h: &PsiNormHypothesis,
    rate: &RateSequence,
    range: &EvalRange,
) -> Result<TailCertificate, CertError> {
    check_order(rate, range)?;
    markov(psi_size(h, rate)?, rate.clone(), "from_psi_norm")
}

/// ℓ_{rₙ} norm of a vector with `ψα`-bounded coordinates.
pub fn psi_lp_norm_cert(
    h: &PsiNormHypothesis,
    rate: &RateSequence,
    range: &EvalRange,
) -> Result<TailCertificate, CertError> {
    check_order(rate, range)?;
    let size = SizeSequence::product(vec![SizeSequence::NthRoot(rate.clone()), psi_size(h, rate)?]);
    markov(size, rate.clone(), "psi_lp_norm_cert")
}

/// ℓ∞ norm of a vector with `ψα`-bounded coordinates, `rₙ ≥ c·log n`.
pub fn psi_linf_norm_cert(
    h: &PsiNormHypothesis,
    rate: &RateSequence,
    c: f64,
    range: &EvalRange,
) -> Result<TailCertificate, CertError> {
    check_order(rate, range)?;
    check_log_growth(rate, c, range)?;
    let size = SizeSequence::product(vec![SizeSequence::Const((1.0 / c).exp()), psi_size(h, rate)?]);
    markov(size, rate.clone(), "psi_linf_norm_cert")
}

/// `‖Xₙ‖₂` for a sub-Gaussian vector in dimension `dₙ` with `rₙ ≥ k·dₙ`.
/// The exponent constant is left symbolic under `c_name`.
pub fn subgaussian_l2_cert(
    dim: &Dimension,
    rate: &RateSequence,
    declared_multiple: f64,
    c_name: &str,
    range: &EvalRange,
) -> Result<TailCertificate, CertError> {
    for n in range.grid() {
        let (r, d) = (rate.eval(n)?, dim.eval(n)?);
        if r < declared_multiple * d {
            return Err(CertError::RateBelowDimension(format!(
                "r = {r} < {declared_multiple}·d = {} at n = {n}",
                declared_multiple * d
            )));
        }
    }
    CertificateParts::new(
        SizeSequence::PowerOfRate { rate: rate.clone(), gamma: 0.5 },
        rate.clone(),
        1.0,
        E,
        RateFunction::linear(Constant::symbol(c_name)),
        Provenance::leaf("subgaussian_l2_cert").with_note(format!("r_n >= {declared_multiple} d_n")),
    )
    .build()
}

/// Mean of `n` independent summands with `‖·‖_{ψα} ≤ 1`, `α ∈ {1, 2}`.
///
/// `α = 1` (Bernstein): size `√(rₙ/n)`, rate `rₙ ∧ n`, `f = c·t`, `C1 = 2`.
/// `α = 2` (Hoeffding): size `√(rₙ/n)`, rate `rₙ`, `f = c·t²`, `C1 = e`.
pub fn sample_mean_cert(
    alpha: f64,
    rate: &RateSequence,
    c_name: &str,
) -> Result<TailCertificate, CertError> {
    let size = SizeSequence::SqrtRateOverN(rate.clone());
    let c = Constant::symbol(c_name);
    let (rate_out, f, c1) = if alpha == 1.0 {
        (
            RateSequence::min(rate.clone(), RateSequence::LinearN(1.0)),
            RateFunction::linear(c),
            2.0,
        )
    } else if alpha == 2.0 {
        (rate.clone(), RateFunction::power(c, 2.0), E)
    } else {
        return Err(CertError::BadAlpha(alpha));
    };
    CertificateParts::new(size, rate_out, c1, 1.0, f, Provenance::leaf("sample_mean_cert"))
        .build()
        .map(|k| with_note(k, format!("alpha={alpha}")))
}

/// Mean of `n` iid standard normals: `P(|X̄| ≥ t√(rₙ/n)) ≤ 2e^{−rₙt²/2}`.
pub fn gaussian_mean_cert(rate: &RateSequence) -> Result<TailCertificate, CertError> {
    CertificateParts::new(
        SizeSequence::SqrtRateOverN(rate.clone()),
        rate.clone(),
        2.0,
        1.0,
        RateFunction::power(0.5, 2.0),
        Provenance::leaf("gaussian_mean_cert"),
    )
    .build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cert::ConstantsStatus;

    #[test]
    fn moment_cert_shape() {
        let h = MomentHypothesis { order: RateSequence::Const(2.0), bound: SizeSequence::Const(1.5) };
        let k = from_moment_bound(&h).unwrap();
        assert_eq!(k.c1(), 1.0);
        assert_eq!(k.c2(), E);
        // Chebyshev shape t^{-2}
        for t in [E, 4.0, 10.0] {
            assert!((k.eval_bound(5, t).unwrap() - t.powi(-2)).abs() < 1e-15);
        }
    }

    #[test]
    fn lp_and_linf_agree_at_log_rate() {
        let c = 2.0;
        let h = MomentHypothesis { order: RateSequence::LogN(c), bound: SizeSequence::Const(1.0) };
        let range = EvalRange::new(3, 100_000, 16);
        let lp = lp_norm_cert(&h).unwrap();
        let li = linf_norm_cert(&h, c, &range).unwrap();
        for n in range.grid() {
            let a = lp.size().eval(n).unwrap();
            let b = li.size().eval(n).unwrap();
            assert!((a - b).abs() < 1e-12 * b, "n={n}: {a} vs {b}");
        }
        let weak = MomentHypothesis { order: RateSequence::Const(2.0), bound: SizeSequence::Const(1.0) };
        assert!(matches!(linf_norm_cert(&weak, 1.0, &range), Err(CertError::RateTooSmall(_))));
    }

    #[test]
    fn psi_cert_at_unit_rate() {
        let h = PsiNormHypothesis { alpha: 2.0, norm_bound: 1.0, per_coordinate: false, dimension: None };
        let k = from_psi_norm(&h, &RateSequence::Const(1.0), &EvalRange::default()).unwrap();
        assert_eq!(k.size().eval(10).unwrap(), 1.0);
        assert!(matches!(
            from_psi_norm(&h, &RateSequence::Const(0.5), &EvalRange::default()),
            Err(CertError::RateBelowOne(_))
        ));
    }

    #[test]
    fn subgaussian_symbolic() {
        let range = EvalRange::new(1, 1000, 8);
        let k = subgaussian_l2_cert(&Dimension::Const(10), &RateSequence::Const(10.0), 1.0, "hkz_c", &range).unwrap();
        assert_eq!(k.constants_status(), &ConstantsStatus::UnknownPositive(vec!["hkz_c".into()]));
        assert!(matches!(k.eval_bound(1, 3.0), Err(CertError::SymbolicConstants(_))));
        assert!(matches!(
            subgaussian_l2_cert(&Dimension::Const(10), &RateSequence::Const(5.0), 1.0, "hkz_c", &range),
            Err(CertError::RateBelowDimension(_))
        ));
    }

    #[test]
    fn sample_mean_shapes() {
        let a1 = sample_mean_cert(1.0, &RateSequence::Const(1.0), "c").unwrap();
        assert_eq!(a1.c1(), 2.0);
        assert_eq!(a1.size().eval(1).unwrap(), 1.0);
        let a2 = sample_mean_cert(2.0, &RateSequence::LogN(1.0), "c").unwrap();
        assert_eq!(a2.c1(), E);
        assert!(matches!(sample_mean_cert(3.0, &RateSequence::Const(1.0), "c"), Err(CertError::BadAlpha(_))));
    }

    #[test]
    fn gaussian_mean_dominates_exact_tail() {
        let k = gaussian_mean_cert(&RateSequence::LogN(1.0)).unwrap();
        for n in [2u64, 10, 100, 1000, 10_000] {
            let r = (n as f64).ln();
            for i in 0..=50 {
                let t = 1.0 + 0.1 * i as f64;
                let exact = crate::special::normal_two_sided_sf(t * r.sqrt());
                assert!(exact <= k.eval_bound(n, t).unwrap());
            }
        }
        let unit = gaussian_mean_cert(&RateSequence::Const(1.0)).unwrap();
        assert!((unit.eval_bound(1, 2.0).unwrap() - 2.0 * (-2f64).exp()).abs() < 1e-15);
    }
}
