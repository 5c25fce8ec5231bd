//! Rate functions: the non-decreasing `f` in the exponent of a tail bound, and
//! the non-increasing `g` used by lower-tail certificates.

use crate::error::CertError;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// A scalar coefficient that is either known or a named positive unknown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Constant {
    Value(f64),
    Symbol { symbol: String },
}

impl Constant {
    pub fn symbol(name: impl Into<String>) -> Self {
        Constant::Symbol {
            symbol: name.into(),
        }
    }

    pub fn value(&self) -> Result<f64, CertError> {
        match self {
            Constant::Value(v) => Ok(*v),
            Constant::Symbol { symbol } => Err(CertError::SymbolicConstants(vec![symbol.clone()])),
        }
    }

    fn substitute(&self, values: &BTreeMap<String, f64>) -> Constant {
        match self {
            Constant::Symbol { symbol } => match values.get(symbol) {
                Some(v) => Constant::Value(*v),
                None => self.clone(),
            },
            c => c.clone(),
        }
    }

    fn collect(&self, out: &mut BTreeSet<String>) {
        if let Constant::Symbol { symbol } = self {
            out.insert(symbol.clone());
        }
    }
}

impl From<f64> for Constant {
    fn from(v: f64) -> Self {
        Constant::Value(v)
    }
}

/// Closed family of rate functions `f: [C2, ∞) → (0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateFunction {
    /// `log t`
    Log,
    /// `c·t`
    Linear { c: Constant },
    /// `c·t^gamma`
    Power { c: Constant, gamma: f64 },
    /// `c·min(t², t)`
    LinearCapped { c: Constant },
    /// `base(t) − kappa`
    Shifted { base: Box<RateFunction>, kappa: f64 },
    /// pointwise minimum
    Min {
        left: Box<RateFunction>,
        right: Box<RateFunction>,
    },
    /// `base(t / a)`
    Rescaled { base: Box<RateFunction>, a: f64 },
    /// `base(t^exponent)`; exponent 1/2 is the square-root reparametrization.
    ArgPower {
        base: Box<RateFunction>,
        exponent: f64,
    },
}

impl RateFunction {
    pub fn linear(c: impl Into<Constant>) -> Self {
        RateFunction::Linear { c: c.into() }
    }

    pub fn power(c: impl Into<Constant>, gamma: f64) -> Self {
        RateFunction::Power { c: c.into(), gamma }
    }

    pub fn linear_capped(c: impl Into<Constant>) -> Self {
        RateFunction::LinearCapped { c: c.into() }
    }

    /// `min(self, other)`, collapsing identical operands.
    pub fn min(self, other: RateFunction) -> Self {
        if self == other {
            self
        } else {
            RateFunction::Min {
                left: Box::new(self),
                right: Box::new(other),
            }
        }
    }

    pub fn shifted(self, kappa: f64) -> Self {
        if kappa == 0.0 {
            return self;
        }
        match self {
            RateFunction::Shifted { base, kappa: k0 } => RateFunction::Shifted {
                base,
                kappa: k0 + kappa,
            },
            f => RateFunction::Shifted {
                base: Box::new(f),
                kappa,
            },
        }
    }

    pub fn rescaled(self, a: f64) -> Self {
        if a == 1.0 {
            return self;
        }
        RateFunction::Rescaled {
            base: Box::new(self),
            a,
        }
    }

    /// `t ↦ self(t^exponent)`. Powers of powers are merged and a power-law
    /// base absorbs the exponent directly.
    pub fn arg_power(self, exponent: f64) -> Self {
        if exponent == 1.0 {
            return self;
        }
        match self {
            RateFunction::Power { c, gamma } => RateFunction::Power {
                c,
                gamma: gamma * exponent,
            },
            RateFunction::ArgPower { base, exponent: e0 } => {
                let e = e0 * exponent;
                if (e - 1.0).abs() < 1e-14 {
                    *base
                } else {
                    RateFunction::ArgPower { base, exponent: e }
                }
            }
            f => RateFunction::ArgPower {
                base: Box::new(f),
                exponent,
            },
        }
    }

    /// Evaluates `f(t)`; fails if a symbolic constant is reached.
    pub fn eval(&self, t: f64) -> Result<f64, CertError> {
        Ok(match self {
            RateFunction::Log => t.ln(),
            RateFunction::Linear { c } => c.value()? * t,
            RateFunction::Power { c, gamma } => c.value()? * t.powf(*gamma),
            RateFunction::LinearCapped { c } => c.value()? * (t * t).min(t),
            RateFunction::Shifted { base, kappa } => base.eval(t)? - kappa,
            RateFunction::Min { left, right } => left.eval(t)?.min(right.eval(t)?),
            RateFunction::Rescaled { base, a } => base.eval(t / a)?,
            RateFunction::ArgPower { base, exponent } => base.eval(t.powf(*exponent))?,
        })
    }

    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            RateFunction::Log => {}
            RateFunction::Linear { c }
            | RateFunction::Power { c, .. }
            | RateFunction::LinearCapped { c } => c.collect(out),
            RateFunction::Shifted { base, .. }
            | RateFunction::Rescaled { base, .. }
            | RateFunction::ArgPower { base, .. } => base.collect_symbols(out),
            RateFunction::Min { left, right } => {
                left.collect_symbols(out);
                right.collect_symbols(out);
            }
        }
    }

    /// Replaces named constants by values; unnamed symbols are left in place.
    pub fn substitute(&self, values: &BTreeMap<String, f64>) -> RateFunction {
        match self {
            RateFunction::Log => RateFunction::Log,
            RateFunction::Linear { c } => RateFunction::Linear {
                c: c.substitute(values),
            },
            RateFunction::Power { c, gamma } => RateFunction::Power {
                c: c.substitute(values),
                gamma: *gamma,
            },
            RateFunction::LinearCapped { c } => RateFunction::LinearCapped {
                c: c.substitute(values),
            },
            RateFunction::Shifted { base, kappa } => RateFunction::Shifted {
                base: Box::new(base.substitute(values)),
                kappa: *kappa,
            },
            RateFunction::Min { left, right } => RateFunction::Min {
                left: Box::new(left.substitute(values)),
                right: Box::new(right.substitute(values)),
            },
            RateFunction::Rescaled { base, a } => RateFunction::Rescaled {
                base: Box::new(base.substitute(values)),
                a: *a,
            },
            RateFunction::ArgPower { base, exponent } => RateFunction::ArgPower {
                base: Box::new(base.substitute(values)),
                exponent: *exponent,
            },
        }
    }

    /// Copy with every symbol set to 1, used for structural checks.
    pub(crate) fn with_unit_symbols(&self) -> RateFunction {
        let values = self.symbols().into_iter().map(|s| (s, 1.0)).collect();
        self.substitute(&values)
    }

    /// Parameter checks: positive coefficients, scales and exponents.
    pub fn check_parameters(&self) -> Result<(), CertError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CertError::Invalid(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match self {
            RateFunction::Log => Ok(()),
            RateFunction::Linear { c } | RateFunction::LinearCapped { c } => match c {
                Constant::Value(v) => positive("c", *v),
                Constant::Symbol { .. } => Ok(()),
            },
            RateFunction::Power { c, gamma } => {
                if let Constant::Value(v) = c {
                    positive("c", *v)?;
                }
                positive("gamma", *gamma)
            }
            RateFunction::Shifted { base, kappa } => {
                if !(*kappa >= 0.0 && kappa.is_finite()) {
                    return Err(CertError::Invalid(format!("kappa must be >= 0, got {kappa}")));
                }
                base.check_parameters()
            }
            RateFunction::Min { left, right } => {
                left.check_parameters()?;
                right.check_parameters()
            }
            RateFunction::Rescaled { base, a } => {
                positive("a", *a)?;
                base.check_parameters()
            }
            RateFunction::ArgPower { base, exponent } => {
                positive("exponent", *exponent)?;
                base.check_parameters()
            }
        }
    }

    /// Checks positivity and monotonicity on a geometric grid of `points`
    /// values starting at `start` and spanning twelve decades.
    pub fn check_on_domain(&self, start: f64, points: usize) -> Result<(), CertError> {
        self.check_parameters()?;
        let f = self.with_unit_symbols();
        let ratio = 1e12f64.powf(1.0 / (points.max(2) - 1) as f64);
        let mut t = start;
        let mut prev = f64::NEG_INFINITY;
        for _ in 0..points.max(2) {
            let v = f.eval(t)?;
            if !(v > 0.0) {
                return Err(CertError::Invalid(format!("rate function not positive at t={t}: {v}")));
            }
            if v < prev - 1e-12 * prev.abs().max(1.0) {
                return Err(CertError::Invalid(format!("rate function decreases at t={t}")));
            }
            prev = v;
            t *= ratio;
        }
        Ok(())
    }

    /// Smallest `t ≥ from` (up to bisection precision, always on the safe side)
    /// with `f(t) ≥ level`. Returns `None` when no `t` below `1e300` qualifies.
    pub fn threshold_at_least(&self, level: f64, from: f64) -> Result<Option<f64>, CertError> {
        if self.eval(from)? >= level {
            return Ok(Some(from));
        }
        let mut lo = from;
        let mut hi = from.max(1.0) * 2.0;
        while self.eval(hi)? < level {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return Ok(None);
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid)? >= level {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(Some(hi))
    }

    /// Largest `t ≥ from` with `f(t) ≤ level`, i.e. where the exponent still
    /// stays below `level`. `None` if `f(from) > level`; infinite if never exceeded.
    pub fn last_below(&self, level: f64, from: f64) -> Result<Option<f64>, CertError> {
        if self.eval(from)? > level {
            return Ok(None);
        }
        let mut lo = from;
        let mut hi = from.max(1.0) * 2.0;
        while self.eval(hi)? <= level {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return Ok(Some(f64::INFINITY));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid)? <= level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Some(lo))
    }
}

/// Non-increasing rate functions on `(0, C2]` diverging at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerRateFunction {
    /// `−log t`
    NegLog,
    /// `c·t^(−gamma)`
    InversePower { c: f64, gamma: f64 },
}

impl LowerRateFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            LowerRateFunction::NegLog => -t.ln(),
            LowerRateFunction::InversePower { c, gamma } => c * t.powf(-gamma),
        }
    }

    /// Positivity on `(0, c2]` and monotone growth towards zero on a grid.
    pub fn check_on_domain(&self, c2: f64, points: usize) -> Result<(), CertError> {
        if let LowerRateFunction::InversePower { c, gamma } = self {
            if !(*c > 0.0 && *gamma > 0.0) {
                return Err(CertError::Invalid("inverse power needs c, gamma > 0".into()));
            }
        }
        let ratio = 1e-12f64.powf(1.0 / (points.max(2) - 1) as f64);
        let mut t = c2;
        let mut prev = f64::NEG_INFINITY;
        for _ in 0..points.max(2) {
            let v = self.eval(t);
            if !(v > 0.0) {
                return Err(CertError::Invalid(format!("lower rate not positive at t={t}")));
            }
            if v < prev {
                return Err(CertError::Invalid(format!("lower rate increases at t={t}")));
            }
            prev = v;
            t *= ratio;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn closed_forms_evaluate() {
        assert!((RateFunction::Log.eval(E).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(RateFunction::power(0.5, 2.0).eval(3.0).unwrap(), 4.5);
        assert_eq!(RateFunction::linear_capped(2.0).eval(0.5).unwrap(), 0.5);
        assert_eq!(RateFunction::linear_capped(2.0).eval(3.0).unwrap(), 6.0);
        let f = RateFunction::Log.rescaled(2.0).shifted(1.0);
        assert!((f.eval(2.0 * E * E).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symbolic_constant_blocks_evaluation() {
        let f = RateFunction::linear(Constant::symbol("c"));
        assert!(matches!(f.eval(1.0), Err(CertError::SymbolicConstants(_))));
        let mut vals = BTreeMap::new();
        vals.insert("c".to_string(), 3.0);
        assert_eq!(f.substitute(&vals).eval(2.0).unwrap(), 6.0);
        assert_eq!(f.symbols().into_iter().collect::<Vec<_>>(), vec!["c".to_string()]);
    }

    #[test]
    fn arg_power_merges() {
        let f = RateFunction::Log.arg_power(2.0).arg_power(0.5);
        assert_eq!(f, RateFunction::Log);
        let g = RateFunction::power(3.0, 2.0).arg_power(0.5);
        assert_eq!(g, RateFunction::power(3.0, 1.0));
    }

    #[test]
    fn every_form_is_monotone_and_positive() {
        let forms = vec![
            (RateFunction::Log, E),
            (RateFunction::linear(0.3), 0.1),
            (RateFunction::power(0.5, 2.0), 0.5),
            (RateFunction::linear_capped(1.0), 0.01),
            (RateFunction::Log.shifted(2.0), E.powi(3)),
            (RateFunction::Log.min(RateFunction::linear(1.0)), 2.0),
            (RateFunction::Log.rescaled(2.0), 2.0 * E),
            (RateFunction::Log.arg_power(0.5), E * E),
        ];
        for (f, start) in forms {
            f.check_on_domain(start, 1000).unwrap();
        }
        assert!(RateFunction::Log.check_on_domain(1.0, 1000).is_err());
    }

    #[test]
    fn thresholds_bracket_the_level() {
        let t = RateFunction::Log.threshold_at_least(3.0, E).unwrap().unwrap();
        assert!((t - E.powi(3)).abs() < 1e-9);
        assert!(RateFunction::Log.eval(t).unwrap() >= 3.0);
        let s = RateFunction::linear(2.0).last_below(10.0, 1.0).unwrap().unwrap();
        assert!((s - 5.0).abs() < 1e-9 && s <= 5.0);
        assert_eq!(RateFunction::linear(2.0).last_below(1.0, 1.0).unwrap(), None);
    }

    #[test]
    fn lower_rates() {
        LowerRateFunction::NegLog.check_on_domain(1.0 / E, 1000).unwrap();
        assert!(LowerRateFunction::NegLog.check_on_domain(1.0, 10).is_err());
        LowerRateFunction::InversePower { c: 1.0, gamma: 2.0 }
            .check_on_domain(3.0, 100)
            .unwrap();
    }
}
