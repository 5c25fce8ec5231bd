//! Deterministic sequences indexed by `n`: tail rates `rₙ`, sizes `yₙ`,
//! dimensions `dₙ` and exceptional probabilities `pₙ`.

use crate::error::CertError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Values tabulated over an `n`-grid. Lookup uses the entry with the greatest
/// key `≤ n`, so a table is a right-continuous step function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Table(pub BTreeMap<u64, f64>);

impl Table {
    pub fn lookup(&self, n: u64) -> Result<f64, CertError> {
        self.0
            .range(..=n)
            .next_back()
            .map(|(_, v)| *v)
            .ok_or_else(|| CertError::Sequence(format!("table has no entry at or below n={n}")))
    }
}

impl FromIterator<(u64, f64)> for Table {
    fn from_iter<I: IntoIterator<Item = (u64, f64)>>(iter: I) -> Self {
        Table(iter.into_iter().collect())
    }
}

/// Dimension sequence `n ↦ dₙ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Const(u64),
    /// `dₙ = n`
    Identity,
    Table(Table),
}

impl Dimension {
    pub fn eval(&self, n: u64) -> Result<f64, CertError> {
        match self {
            Dimension::Const(d) => Ok(*d as f64),
            Dimension::Identity => Ok(n as f64),
            Dimension::Table(t) => t.lookup(n),
        }
    }
}

fn positive(v: f64, what: &str, n: u64) -> Result<f64, CertError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CertError::Sequence(format!("{what} is {v} at n={n}; expected positive")))
    }
}

/// Tail argument `rₙ > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateSequence {
    Const(f64),
    /// `c·log n`
    LogN(f64),
    /// `c·n`
    LinearN(f64),
    /// `dₙ·log(n/dₙ)`
    DLogND(Dimension),
    Min(Box<RateSequence>, Box<RateSequence>),
    Custom(Table),
}

impl RateSequence {
    pub fn eval(&self, n: u64) -> Result<f64, CertError> {
        let nf = n as f64;
        let v = match self {
            RateSequence::Const(r) => *r,
            RateSequence::LogN(c) => c * nf.ln(),
            RateSequence::LinearN(c) => c * nf,
            RateSequence::DLogND(dim) => {
                let d = dim.eval(n)?;
                d * (nf / d).ln()
            }
            RateSequence::Min(a, b) => a.eval(n)?.min(b.eval(n)?),
            RateSequence::Custom(t) => t.lookup(n)?,
        };
        positive(v, "rate", n)
    }

    /// `rₙ ∧ sₙ`, collapsing equal operands and constant pairs.
    pub fn min(a: RateSequence, b: RateSequence) -> RateSequence {
        match (&a, &b) {
            _ if a == b => a,
            (RateSequence::Const(x), RateSequence::Const(y)) => RateSequence::Const(x.min(*y)),
            _ => RateSequence::Min(Box::new(a), Box::new(b)),
        }
    }

    pub fn check_positive(&self, range: &EvalRange) -> Result<(), CertError> {
        for n in range.grid() {
            self.eval(n)?;
        }
        Ok(())
    }
}

/// Local modulus of continuity at zero, `δ ↦ ω(δ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modulus {
    /// `scale·δ^exponent`
    Power { scale: f64, exponent: f64 },
    /// `|sin δ|`
    AbsSin,
}

impl Modulus {
    pub const IDENTITY: Modulus = Modulus::Power {
        scale: 1.0,
        exponent: 1.0,
    };

    pub fn eval(&self, delta: f64) -> f64 {
        match self {
            Modulus::Power { scale, exponent } => {
                if delta == 0.0 {
                    if *exponent > 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    scale * delta.abs().powf(*exponent)
                }
            }
            Modulus::AbsSin => delta.sin().abs(),
        }
    }
}

/// Size argument `yₙ`. Sizes are deterministic; random sizes are only
/// handled by the verifier's joint samplers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeSequence {
    Const(f64),
    /// `c·n^a·(log n)^b`
    Monomial { c: f64, a: f64, b: f64 },
    /// `√(rₙ/n)`
    SqrtRateOverN(RateSequence),
    /// `rₙ^gamma`
    PowerOfRate { rate: RateSequence, gamma: f64 },
    /// `n^(1/rₙ)`
    NthRoot(RateSequence),
    Product(Vec<SizeSequence>),
    Sum(Vec<SizeSequence>),
    Max(Vec<SizeSequence>),
    Min(Vec<SizeSequence>),
    /// `base^exponent`
    Pow {
        base: Box<SizeSequence>,
        exponent: f64,
    },
    /// `ω(inner)`
    Modulus {
        modulus: Modulus,
        inner: Box<SizeSequence>,
    },
    Custom(Table),
}

impl SizeSequence {
    /// Raw evaluation; may return zero. Use [`SizeSequence::eval_positive`]
    /// where the size must be strictly positive.
    pub fn eval(&self, n: u64) -> Result<f64, CertError> {
        let nf = n as f64;
        let v = match self {
            SizeSequence::Const(y) => *y,
            SizeSequence::Monomial { c, a, b } => {
                let l = nf.ln();
                let lb = if *b == 0.0 { 1.0 } else { l.powf(*b) };
                c * nf.powf(*a) * lb
            }
            SizeSequence::SqrtRateOverN(r) => (r.eval(n)? / nf).sqrt(),
            SizeSequence::PowerOfRate { rate, gamma } => rate.eval(n)?.powf(*gamma),
            SizeSequence::NthRoot(r) => nf.powf(1.0 / r.eval(n)?),
            SizeSequence::Product(xs) => {
                let mut p = 1.0;
                for x in xs {
                    p *= x.eval(n)?;
                }
                p
            }
            SizeSequence::Sum(xs) => {
                let mut s = 0.0;
                for x in xs {
                    s += x.eval(n)?.abs();
                }
                s
            }
            SizeSequence::Max(xs) => {
                let mut m = f64::NEG_INFINITY;
                for x in xs {
                    m = m.max(x.eval(n)?.abs());
                }
                m
            }
            SizeSequence::Min(xs) => {
                let mut m = f64::INFINITY;
                for x in xs {
                    m = m.min(x.eval(n)?);
                }
                m
            }
            SizeSequence::Pow { base, exponent } => base.eval(n)?.abs().powf(*exponent),
            SizeSequence::Modulus { modulus, inner } => modulus.eval(inner.eval(n)?),
            SizeSequence::Custom(t) => t.lookup(n)?,
        };
        if v.is_nan() || v < 0.0 {
            return Err(CertError::Sequence(format!("size evaluates to {v} at n={n}")));
        }
        Ok(v)
    }

    pub fn eval_positive(&self, n: u64) -> Result<f64, CertError> {
        positive(self.eval(n)?, "size", n)
    }

    pub fn check_positive(&self, range: &EvalRange) -> Result<(), CertError> {
        for n in range.grid() {
            self.eval_positive(n)?;
        }
        Ok(())
    }

    /// `|a| + |b| + …` with constant folding.
    pub fn sum(parts: Vec<SizeSequence>) -> SizeSequence {
        let mut konst = 0.0;
        let mut rest = Vec::new();
        for p in parts {
            match p {
                SizeSequence::Const(c) => konst += c.abs(),
                SizeSequence::Sum(inner) => rest.extend(inner),
                other => rest.push(other),
            }
        }
        if rest.is_empty() {
            return SizeSequence::Const(konst);
        }
        if konst != 0.0 {
            rest.push(SizeSequence::Const(konst));
        }
        if rest.len() == 1 {
            rest.pop().unwrap()
        } else {
            SizeSequence::Sum(rest)
        }
    }

    /// Product with constant folding; unit factors disappear.
    pub fn product(parts: Vec<SizeSequence>) -> SizeSequence {
        let mut konst = 1.0;
        let mut rest = Vec::new();
        for p in parts {
            match p {
                SizeSequence::Const(c) => konst *= c,
                SizeSequence::Product(inner) => rest.extend(inner),
                other => rest.push(other),
            }
        }
        if rest.is_empty() {
            return SizeSequence::Const(konst);
        }
        if konst != 1.0 {
            rest.insert(0, SizeSequence::Const(konst));
        }
        if rest.len() == 1 {
            rest.pop().unwrap()
        } else {
            SizeSequence::Product(rest)
        }
    }

    pub fn max(parts: Vec<SizeSequence>) -> SizeSequence {
        let mut uniq: Vec<SizeSequence> = Vec::new();
        for p in parts {
            if !uniq.contains(&p) {
                uniq.push(p);
            }
        }
        if uniq.len() == 1 {
            uniq.pop().unwrap()
        } else {
            SizeSequence::Max(uniq)
        }
    }

    pub fn min(parts: Vec<SizeSequence>) -> SizeSequence {
        let mut uniq: Vec<SizeSequence> = Vec::new();
        for p in parts {
            if !uniq.contains(&p) {
                uniq.push(p);
            }
        }
        if uniq.len() == 1 {
            uniq.pop().unwrap()
        } else {
            SizeSequence::Min(uniq)
        }
    }

    pub fn pow(self, exponent: f64) -> SizeSequence {
        if exponent == 1.0 {
            return self;
        }
        match self {
            SizeSequence::Const(c) => SizeSequence::Const(c.abs().powf(exponent)),
            SizeSequence::Pow { base, exponent: e0 } => {
                let e = e0 * exponent;
                if (e - 1.0).abs() < 1e-14 {
                    *base
                } else {
                    SizeSequence::Pow { base, exponent: e }
                }
            }
            s => SizeSequence::Pow {
                base: Box::new(s),
                exponent,
            },
        }
    }
}

/// Exceptional probability sequence `pₙ ∈ [0, 1]`, stored in log form where
/// possible so that super-exponentially small values do not underflow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbSequence {
    /// `pₙ = 0`
    Zero,
    /// `pₙ = exp(−gₙ)`
    ExpNeg(SizeSequence),
    Table(Table),
}

impl ProbSequence {
    /// `−log pₙ`, with `+∞` for zero probabilities.
    pub fn neg_log(&self, n: u64) -> Result<f64, CertError> {
        match self {
            ProbSequence::Zero => Ok(f64::INFINITY),
            ProbSequence::ExpNeg(g) => g.eval(n),
            ProbSequence::Table(t) => {
                let p = t.lookup(n)?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(CertError::Sequence(format!("probability {p} at n={n}")));
                }
                Ok(-p.ln())
            }
        }
    }

    pub fn eval(&self, n: u64) -> Result<f64, CertError> {
        Ok((-self.neg_log(n)?).exp())
    }
}

/// Finite geometric grid of indices on which sequence properties are checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRange {
    pub start: u64,
    pub end: u64,
    pub points: usize,
}

impl EvalRange {
    pub fn new(start: u64, end: u64, points: usize) -> Self {
        EvalRange {
            start: start.max(1),
            end: end.max(start.max(1)),
            points: points.max(2),
        }
    }

    /// Sorted, de-duplicated geometric grid including both endpoints.
    pub fn grid(&self) -> Vec<u64> {
        let (a, b) = (self.start as f64, self.end as f64);
        let mut out: Vec<u64> = (0..self.points)
            .map(|i| {
                let frac = i as f64 / (self.points - 1) as f64;
                (a * (b / a).powf(frac)).round() as u64
            })
            .collect();
        out.push(self.end);
        out[0] = self.start;
        out.sort_unstable();
        out.dedup();
        out
    }
}

impl Default for EvalRange {
    fn default() -> Self {
        EvalRange::new(1, 1_000_000, 64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_evaluate_and_reject_nonpositive() {
        assert_eq!(RateSequence::Const(5.0).eval(1).unwrap(), 5.0);
        assert!((RateSequence::LogN(1.0).eval(100).unwrap() - 100f64.ln()).abs() < 1e-15);
        assert!(RateSequence::LogN(1.0).eval(1).is_err());
        let r = RateSequence::DLogND(Dimension::Const(4));
        assert!((r.eval(64).unwrap() - 4.0 * 16f64.ln()).abs() < 1e-12);
        assert!(r.eval(4).is_err());
        let m = RateSequence::min(RateSequence::Const(3.0), RateSequence::LinearN(1.0));
        assert_eq!(m.eval(2).unwrap(), 2.0);
        assert_eq!(m.eval(10).unwrap(), 3.0);
    }

    #[test]
    fn rate_min_collapses() {
        assert_eq!(
            RateSequence::min(RateSequence::Const(4.0), RateSequence::Const(2.0)),
            RateSequence::Const(2.0)
        );
        assert_eq!(
            RateSequence::min(RateSequence::LogN(1.0), RateSequence::LogN(1.0)),
            RateSequence::LogN(1.0)
        );
    }

    #[test]
    fn sizes_fold_constants() {
        assert_eq!(
            SizeSequence::sum(vec![SizeSequence::Const(1.0), SizeSequence::Const(1.0)]),
            SizeSequence::Const(2.0)
        );
        let s = SizeSequence::SqrtRateOverN(RateSequence::LogN(1.0));
        assert_eq!(SizeSequence::product(vec![s.clone(), SizeSequence::Const(1.0)]), s);
        assert_eq!(s.clone().pow(2.0).pow(0.5), s);
    }

    #[test]
    fn nth_root_identity() {
        // n^(1/(c log n)) = e^(1/c)
        let c = 2.0;
        let s = SizeSequence::NthRoot(RateSequence::LogN(c));
        for n in [10u64, 1000, 123_456] {
            assert!((s.eval(n).unwrap() - (1.0 / c).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn table_is_step_function() {
        let t: Table = [(10u64, 1.0), (100, 2.0)].into_iter().collect();
        assert!(t.lookup(9).is_err());
        assert_eq!(t.lookup(50).unwrap(), 1.0);
        assert_eq!(t.lookup(1000).unwrap(), 2.0);
    }

    #[test]
    fn grid_covers_endpoints() {
        let g = EvalRange::new(3, 1000, 10).grid();
        assert_eq!(*g.first().unwrap(), 3);
        assert_eq!(*g.last().unwrap(), 1000);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn prob_sequences() {
        assert_eq!(ProbSequence::Zero.eval(5).unwrap(), 0.0);
        let p = ProbSequence::ExpNeg(SizeSequence::Monomial { c: 1.0, a: 0.0, b: 1.0 });
        assert!((p.eval(10).unwrap() - 0.1).abs() < 1e-12);
    }
}
