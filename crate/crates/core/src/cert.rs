//! Certificate types.
//!
//! A [`TailCertificate`] records a claim of the form
//! `P(|Xₙ| ≥ t·|Yₙ|) ≤ C1·exp(−rₙ·f(t))` for every `n ≥ N` and `t ≥ C2`
//! (and `t ≤ Rₙ` for the ceilinged flavor).

use crate::error::CertError;
use crate::rate::{LowerRateFunction, RateFunction};
use crate::sequence::{EvalRange, ProbSequence, RateSequence, SizeSequence};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

/// Grid size used for the rate-function monotonicity check.
pub const RATE_CHECK_POINTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    /// Valid for every `t ≥ C2`.
    #[serde(rename = "O")]
    O,
    /// Valid for `C2 ≤ t ≤ Rₙ` with a ceiling `Rₙ → ∞`.
    #[serde(rename = "OHat")]
    OHat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantsStatus {
    Concrete,
    UnknownPositive(Vec<String>),
}

/// Audit trail: operation name, free-form notes and the digests of the
/// certificates the operation consumed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub operation: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<ProvenanceChild>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceChild {
    pub digest: String,
    pub provenance: Provenance,
}

impl Provenance {
    pub fn leaf(operation: impl Into<String>) -> Self {
        Provenance {
            operation: operation.into(),
            notes: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn from_children(operation: impl Into<String>, children: &[&TailCertificate]) -> Self {
        Provenance {
            operation: operation.into(),
            notes: Vec::new(),
            children: children
                .iter()
                .map(|c| ProvenanceChild {
                    digest: c.digest(),
                    provenance: c.provenance.clone(),
                })
                .collect(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

/// Plain, unvalidated field bundle; also the serialized document shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateParts {
    pub size: SizeSequence,
    pub rate: RateSequence,
    pub c1: f64,
    pub c2: f64,
    pub n_threshold: u64,
    pub f: RateFunction,
    pub flavor: Flavor,
    #[serde(default)]
    pub ceiling: Option<SizeSequence>,
    #[serde(default = "ConstantsStatus::concrete_default")]
    pub constants_status: ConstantsStatus,
    pub provenance: Provenance,
}

impl ConstantsStatus {
    fn concrete_default() -> Self {
        ConstantsStatus::Concrete
    }
}

impl CertificateParts {
    /// Flavor `O`, `N = 1`, no ceiling.
    pub fn new(
        size: SizeSequence,
        rate: RateSequence,
        c1: f64,
        c2: f64,
        f: RateFunction,
        provenance: Provenance,
    ) -> Self {
        CertificateParts {
            size,
            rate,
            c1,
            c2,
            n_threshold: 1,
            f,
            flavor: Flavor::O,
            ceiling: None,
            constants_status: ConstantsStatus::Concrete,
            provenance,
        }
    }

    pub fn build(self) -> Result<TailCertificate, CertError> {
        TailCertificate::try_from(self)
    }
}

/// Validated tail certificate. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CertificateParts", into = "CertificateParts")]
pub struct TailCertificate {
    pub(crate) size: SizeSequence,
    pub(crate) rate: RateSequence,
    pub(crate) c1: f64,
    pub(crate) c2: f64,
    pub(crate) n_threshold: u64,
    pub(crate) f: RateFunction,
    pub(crate) flavor: Flavor,
    pub(crate) ceiling: Option<SizeSequence>,
    pub(crate) constants_status: ConstantsStatus,
    pub(crate) provenance: Provenance,
}

impl TryFrom<CertificateParts> for TailCertificate {
    type Error = CertError;

    fn try_from(p: CertificateParts) -> Result<Self, CertError> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CertError::Invalid(format!("{name} must be positive and finite, got {v}")))
            }
        };
        pos("c1", p.c1)?;
        pos("c2", p.c2)?;
        if p.n_threshold < 1 {
            return Err(CertError::Invalid("n_threshold must be >= 1".into()));
        }
        p.f.check_on_domain(p.c2, RATE_CHECK_POINTS)?;
        if p.flavor == Flavor::OHat && p.ceiling.is_none() {
            return Err(CertError::Invalid("flavor OHat requires a ceiling".into()));
        }
        let symbols: Vec<String> = p.f.symbols().into_iter().collect();
        let status = if symbols.is_empty() {
            ConstantsStatus::Concrete
        } else {
            ConstantsStatus::UnknownPositive(symbols)
        };
        if status != p.constants_status {
            // documents may omit the status; anything explicit must agree
            if p.constants_status != ConstantsStatus::Concrete {
                return Err(CertError::Invalid(format!(
                    "constants_status {:?} disagrees with rate function symbols {:?}",
                    p.constants_status, status
                )));
            }
        }
        Ok(TailCertificate {
            size: p.size,
            rate: p.rate,
            c1: p.c1,
            c2: p.c2,
            n_threshold: p.n_threshold,
            f: p.f,
            flavor: p.flavor,
            ceiling: if p.flavor == Flavor::O { None } else { p.ceiling },
            constants_status: status,
            provenance: p.provenance,
        })
    }
}

impl From<TailCertificate> for CertificateParts {
    fn from(c: TailCertificate) -> Self {
        CertificateParts {
            size: c.size,
            rate: c.rate,
            c1: c.c1,
            c2: c.c2,
            n_threshold: c.n_threshold,
            f: c.f,
            flavor: c.flavor,
            ceiling: c.ceiling,
            constants_status: c.constants_status,
            provenance: c.provenance,
        }
    }
}

impl TailCertificate {
    pub fn size(&self) -> &SizeSequence {
        &self.size
    }
    pub fn rate(&self) -> &RateSequence {
        &self.rate
    }
    pub fn c1(&self) -> f64 {
        self.c1
    }
    pub fn c2(&self) -> f64 {
        self.c2
    }
    pub fn n_threshold(&self) -> u64 {
        self.n_threshold
    }
    pub fn f(&self) -> &RateFunction {
        &self.f
    }
    pub fn flavor(&self) -> Flavor {
        self.flavor
    }
    pub fn ceiling(&self) -> Option<&SizeSequence> {
        self.ceiling.as_ref()
    }
    pub fn constants_status(&self) -> &ConstantsStatus {
        &self.constants_status
    }
    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn to_parts(&self) -> CertificateParts {
        self.clone().into()
    }

    pub fn is_concrete(&self) -> bool {
        self.constants_status == ConstantsStatus::Concrete
    }

    pub fn ensure_concrete(&self) -> Result<(), CertError> {
        match &self.constants_status {
            ConstantsStatus::Concrete => Ok(()),
            ConstantsStatus::UnknownPositive(names) => Err(CertError::SymbolicConstants(names.clone())),
        }
    }

    /// Ceiling `Rₙ`, infinite for flavor `O`.
    pub fn ceiling_at(&self, n: u64) -> Result<f64, CertError> {
        match &self.ceiling {
            Some(c) => c.eval(n),
            None => Ok(f64::INFINITY),
        }
    }

    /// Whether `(n, t)` lies in the region where the bound is claimed.
    pub fn in_domain(&self, n: u64, t: f64) -> Result<bool, CertError> {
        Ok(n >= self.n_threshold && t >= self.c2 && t <= self.ceiling_at(n)?)
    }

    /// `C1·exp(−rₙ·f(t))` after domain and constant checks.
    pub fn eval_bound(&self, n: u64, t: f64) -> Result<f64, CertError> {
        self.ensure_concrete()?;
        if n < self.n_threshold {
            return Err(CertError::OutOfDomain(format!("n={n} below threshold {}", self.n_threshold)));
        }
        if !(t >= self.c2) {
            return Err(CertError::OutOfDomain(format!("t={t} below C2={}", self.c2)));
        }
        let ceiling = self.ceiling_at(n)?;
        if t > ceiling {
            return Err(CertError::OutOfDomain(format!("t={t} above ceiling {ceiling} at n={n}")));
        }
        Ok(self.c1 * (-self.rate.eval(n)? * self.f.eval(t)?).exp())
    }

    /// Log of [`TailCertificate::eval_bound`], finite even where the bound underflows.
    pub fn log_bound(&self, n: u64, t: f64) -> Result<f64, CertError> {
        self.eval_bound(n, t)?;
        Ok(self.c1.ln() - self.rate.eval(n)? * self.f.eval(t)?)
    }

    /// Hex SHA-256 of the canonical JSON document.
    pub fn digest(&self) -> String {
        digest_json(self)
    }

    /// Range-dependent invariants: positive size and rate on the range, and a
    /// ceiling that grows across it.
    pub fn check_invariants(&self, range: &EvalRange) -> Result<(), CertError> {
        let range = EvalRange::new(range.start.max(self.n_threshold), range.end, range.points);
        self.rate.check_positive(&range)?;
        self.size.check_positive(&range)?;
        if let Some(c) = &self.ceiling {
            let grid = range.grid();
            let vals: Result<Vec<f64>, _> = grid.iter().map(|&n| c.eval(n)).collect();
            let vals = vals?;
            let q = (vals.len() / 4).max(1);
            let early = vals[..q].iter().cloned().fold(f64::INFINITY, f64::min);
            let late = vals[vals.len() - q..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !(late > early) {
                return Err(CertError::Invalid("ceiling does not grow across the range".into()));
            }
        }
        Ok(())
    }

    /// Replace named constants and recompute the status.
    pub fn substitute(&self, values: &BTreeMap<String, f64>) -> Result<TailCertificate, CertError> {
        let mut parts = self.to_parts();
        parts.f = self.f.substitute(values);
        parts.constants_status = ConstantsStatus::Concrete;
        parts.provenance = Provenance::from_children("fit_constants", &[self]).with_note(format!(
            "constants: {}",
            values
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(", ")
        ));
        parts.build()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<TailCertificate, CertError> {
        serde_json::from_str(s).map_err(|e| CertError::Invalid(e.to_string()))
    }
}

pub(crate) fn digest_json<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("value serializes");
    let out = Sha256::digest(&bytes);
    out.iter().map(|b| format!("{b:02x}")).collect()
}

/// Lower-tail certificate: `P(Xₙ ≤ t·Yₙ) ≤ C1·exp(−rₙ·g(t))` for
/// `n ≥ N`, `0 < t ≤ C2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerTailCertificate {
    pub size: SizeSequence,
    pub rate: RateSequence,
    pub c1: f64,
    pub c2: f64,
    pub n_threshold: u64,
    pub g: LowerRateFunction,
}

impl LowerTailCertificate {
    pub fn new(
        size: SizeSequence,
        rate: RateSequence,
        c1: f64,
        c2: f64,
        n_threshold: u64,
        g: LowerRateFunction,
    ) -> Result<Self, CertError> {
        if !(c1 > 0.0 && c2 > 0.0 && n_threshold >= 1) {
            return Err(CertError::Invalid("lower certificate needs C1, C2 > 0 and N >= 1".into()));
        }
        g.check_on_domain(c2, RATE_CHECK_POINTS)?;
        Ok(LowerTailCertificate {
            size,
            rate,
            c1,
            c2,
            n_threshold,
            g,
        })
    }

    pub fn eval_bound(&self, n: u64, t: f64) -> Result<f64, CertError> {
        if n < self.n_threshold || !(t > 0.0 && t <= self.c2) {
            return Err(CertError::OutOfDomain(format!("(n={n}, t={t}) outside lower domain")));
        }
        Ok(self.c1 * (-self.rate.eval(n)? * self.g.eval(t)).exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    ToZero,
    ToInfinity,
}

/// Deterministic `wₙ` behind `o_P`/`ô_P` (tending to zero) or `ω_P`
/// (tending to infinity).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallnessWitness {
    pub w: SizeSequence,
    pub direction: Direction,
}

impl SmallnessWitness {
    /// Checks the trend on the range: the second half stays on the right side
    /// of the first value and the last value moved by at least a factor of two.
    pub fn check_trend(&self, range: &EvalRange) -> Result<(), CertError> {
        let vals: Result<Vec<f64>, _> = range.grid().into_iter().map(|n| self.w.eval(n)).collect();
        let vals = vals?;
        let (first, last) = (vals[0], *vals.last().unwrap());
        let ok = match self.direction {
            Direction::ToZero => last <= 0.5 * first && vals[vals.len() / 2..].iter().all(|&v| v <= first),
            Direction::ToInfinity => last >= 2.0 * first && vals[vals.len() / 2..].iter().all(|&v| v >= first),
        };
        if ok {
            Ok(())
        } else {
            Err(CertError::Invalid(format!(
                "witness trend {:?} not visible on the range ({first} -> {last})",
                self.direction
            )))
        }
    }
}

/// Index family description: per-`n` cardinality `|Λₙ|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexFamily {
    pub description: String,
    pub cardinality: SizeSequence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexSizes {
    Shared(SizeSequence),
    PerIndex(Vec<SizeSequence>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexRates {
    Shared(RateSequence),
    PerIndex(Vec<RateSequence>),
}

/// Uniform certificate over a finite index family with shared constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformCertificate {
    pub index_family: IndexFamily,
    pub sizes: IndexSizes,
    pub rates: IndexRates,
    pub c1: f64,
    pub c2: f64,
    pub n_threshold: u64,
    pub f: RateFunction,
    pub flavor: Flavor,
    pub ceiling: Option<SizeSequence>,
    pub provenance: Provenance,
}

impl UniformCertificate {
    /// Every index shares the size, rate and constants of `cert`.
    pub fn from_shared(cert: &TailCertificate, family: IndexFamily) -> Self {
        UniformCertificate {
            index_family: family,
            sizes: IndexSizes::Shared(cert.size.clone()),
            rates: IndexRates::Shared(cert.rate.clone()),
            c1: cert.c1,
            c2: cert.c2,
            n_threshold: cert.n_threshold,
            f: cert.f.clone(),
            flavor: cert.flavor,
            ceiling: cert.ceiling.clone(),
            provenance: Provenance::from_children("uniform_over_index_family", &[cert]),
        }
    }

    /// The certificate for a single index.
    pub fn member(&self, index: usize) -> Result<TailCertificate, CertError> {
        let size = match &self.sizes {
            IndexSizes::Shared(s) => s.clone(),
            IndexSizes::PerIndex(v) => v
                .get(index)
                .cloned()
                .ok_or_else(|| CertError::Invalid(format!("no index {index}")))?,
        };
        let rate = match &self.rates {
            IndexRates::Shared(r) => r.clone(),
            IndexRates::PerIndex(v) => v
                .get(index)
                .cloned()
                .ok_or_else(|| CertError::Invalid(format!("no index {index}")))?,
        };
        CertificateParts {
            size,
            rate,
            c1: self.c1,
            c2: self.c2,
            n_threshold: self.n_threshold,
            f: self.f.clone(),
            flavor: self.flavor,
            ceiling: self.ceiling.clone(),
            constants_status: ConstantsStatus::Concrete,
            provenance: self.provenance.clone(),
        }
        .build()
    }
}

/// Evidence that `P(|Xₙ| ≥ |X̂ₙ|) = pₙ` decays faster than `exp(−C·rₙ)` for every `C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationEvidence {
    pub p: ProbSequence,
    pub rate: RateSequence,
}

impl DominationEvidence {
    /// `−log(pₙ)/rₙ`
    pub fn exponent_ratio(&self, n: u64) -> Result<f64, CertError> {
        Ok(self.p.neg_log(n)? / self.rate.eval(n)?)
    }
}

/// Two-sided (`Θ`) certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaCertificate {
    pub upper: TailCertificate,
    pub lower: LowerTailCertificate,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn simple() -> TailCertificate {
        CertificateParts::new(
            SizeSequence::Const(1.0),
            RateSequence::Const(5.0),
            1.0,
            E,
            RateFunction::Log,
            Provenance::leaf("test"),
        )
        .build()
        .unwrap()
    }

    #[test]
    fn eval_at_domain_start() {
        let c = simple();
        assert!((c.eval_bound(1, E).unwrap() - (-5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn threshold_violation_is_out_of_domain() {
        let mut p = simple().to_parts();
        p.n_threshold = 10;
        let c = p.build().unwrap();
        assert!(matches!(c.eval_bound(5, 3.0), Err(CertError::OutOfDomain(_))));
        assert!(matches!(c.eval_bound(10, 2.0), Err(CertError::OutOfDomain(_))));
    }

    #[test]
    fn rejects_bad_constants_and_zero_rate_at_c2() {
        let mut p = simple().to_parts();
        p.c1 = 0.0;
        assert!(p.build().is_err());
        let mut p = simple().to_parts();
        p.c2 = 1.0; // log 1 = 0
        assert!(p.build().is_err());
        let mut p = simple().to_parts();
        p.flavor = Flavor::OHat;
        assert!(p.build().is_err());
    }

    #[test]
    fn symbolic_certificate_refuses_evaluation() {
        let mut p = simple().to_parts();
        p.f = RateFunction::linear(crate::rate::Constant::symbol("c"));
        let c = p.build().unwrap();
        assert_eq!(c.constants_status(), &ConstantsStatus::UnknownPositive(vec!["c".into()]));
        assert!(matches!(c.eval_bound(1, 3.0), Err(CertError::SymbolicConstants(_))));
    }

    #[test]
    fn document_field_names() {
        let v: serde_json::Value = serde_json::from_str(&simple().to_json()).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(|s| s.as_str()).collect();
        for k in [
            "size",
            "rate",
            "c1",
            "c2",
            "n_threshold",
            "f",
            "flavor",
            "ceiling",
            "constants_status",
            "provenance",
        ] {
            assert!(keys.contains(&k), "missing {k}");
        }
        let back = TailCertificate::from_json(&simple().to_json()).unwrap();
        assert_eq!(back, simple());
        assert_eq!(back.digest(), simple().digest());
    }

    #[test]
    fn invalid_document_is_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&simple().to_json()).unwrap();
        v["c1"] = serde_json::json!(-1.0);
        assert!(TailCertificate::from_json(&v.to_string()).is_err());
    }
}
