//! Distribution families with ψ-norm metadata and seeded sampling.

use rand::Rng as _;
use rand_distr::{Distribution, Exp, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::SampleError;
use crate::rng::{self, Rng};

/// Cap on atom counts for exact enumeration.
pub const MAX_ATOMS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum DistSpec {
    Gaussian { mean: f64, sd: f64 },
    Rademacher,
    UniformBounded { a: f64, b: f64 },
    /// Exponential with rate `lambda`, optionally shifted to mean zero.
    Exponential { lambda: f64, centered: bool },
    ChiSquare { k: f64 },
    /// Product of two independent standard normals.
    ProductOfGaussians,
    DiscreteAtoms { values: Vec<f64>, probs: Vec<f64> },
    IsotropicGaussianVector { d: usize },
    /// `base / scale`, with `scale` the ψα-norm of `base`.
    ScaledToUnitPsi { base: Box<DistSpec>, alpha: f64, scale: f64 },
}

/// A batch of draws.
#[derive(Debug, Clone, PartialEq)]
pub enum Batch {
    Scalars(Vec<f64>),
    Vectors(Vec<Vec<f64>>),
}

impl DistSpec {
    pub fn validate(&self) -> Result<(), SampleError> {
        let bad = |m: String| Err(SampleError::BadSpec(m));
        match self {
            DistSpec::Gaussian { sd, mean } if !(*sd > 0.0 && mean.is_finite()) => {
                bad(format!("gaussian sd must be positive, got {sd}"))
            }
            DistSpec::UniformBounded { a, b } if !(a < b) => bad(format!("need a < b, got [{a}, {b}]")),
            DistSpec::Exponential { lambda, .. } if !(*lambda > 0.0) => {
                bad(format!("exponential rate must be positive, got {lambda}"))
            }
            DistSpec::ChiSquare { k } if !(*k > 0.0) => bad(format!("chi-square dof must be positive, got {k}")),
            DistSpec::DiscreteAtoms { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return bad("atoms and probabilities must be non-empty and of equal length".into());
                }
                if values.len() > MAX_ATOMS {
                    return bad(format!("{} atoms exceed the cap {MAX_ATOMS}", values.len()));
                }
                if probs.iter().any(|p| !(*p >= 0.0)) || values.iter().any(|v| !v.is_finite()) {
                    return bad("atoms must be finite with non-negative probabilities".into());
                }
                let s: f64 = probs.iter().sum();
                if (s - 1.0).abs() > 1e-9 {
                    return bad(format!("probabilities sum to {s}"));
                }
                Ok(())
            }
            DistSpec::IsotropicGaussianVector { d } if *d == 0 => bad("dimension must be positive".into()),
            DistSpec::ScaledToUnitPsi { base, scale, .. } => {
                if !(*scale > 0.0) {
                    return bad(format!("scale must be positive, got {scale}"));
                }
                base.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn is_vector(&self) -> bool {
        match self {
            DistSpec::IsotropicGaussianVector { .. } => true,
            DistSpec::ScaledToUnitPsi { base, .. } => base.is_vector(),
            _ => false,
        }
    }

    /// One scalar draw. Panics on vector families; call [`DistSpec::validate`] first.
    pub fn draw(&self, rng: &mut Rng) -> f64 {
        match self {
            DistSpec::Gaussian { mean, sd } => mean + sd * rng.sample::<f64, _>(StandardNormal),
            DistSpec::Rademacher => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            DistSpec::UniformBounded { a, b } => rng.gen_range(*a..*b),
            DistSpec::Exponential { lambda, centered } => {
                let x = Exp::new(*lambda).expect("validated").sample(rng);
                if *centered {
                    x - 1.0 / lambda
                } else {
                    x
                }
            }
            DistSpec::ChiSquare { k } => rand_distr::ChiSquared::new(*k).expect("validated").sample(rng),
            DistSpec::ProductOfGaussians => {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                a * b
            }
            DistSpec::DiscreteAtoms { values, probs } => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (v, p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                *values.last().expect("validated non-empty")
            }
            DistSpec::IsotropicGaussianVector { .. } => panic!("vector family has no scalar draw"),
            DistSpec::ScaledToUnitPsi { base, scale, .. } => base.draw(rng) / scale,
        }
    }

    /// One vector draw; scalar families give length-one vectors.
    pub fn draw_vector(&self, rng: &mut Rng) -> Vec<f64> {
        match self {
            DistSpec::IsotropicGaussianVector { d } => {
                let n = Normal::new(0.0, 1.0).expect("unit normal");
                (0..*d).map(|_| n.sample(rng)).collect()
            }
            DistSpec::ScaledToUnitPsi { base, scale, .. } if base.is_vector() => {
                base.draw_vector(rng).into_iter().map(|x| x / scale).collect()
            }
            _ => vec![self.draw(rng)],
        }
    }

    /// `log E|X|^p`, from closed forms or exact enumeration.
    pub fn log_abs_moment(&self, p: f64) -> Result<f64, SampleError> {
        let ln_abs_gauss = |p: f64| {
            0.5 * p * std::f64::consts::LN_2 + ln_gamma((p + 1.0) / 2.0) - 0.5 * std::f64::consts::PI.ln()
        };
        Ok(match self {
            DistSpec::Gaussian { mean, sd } => {
                if *mean != 0.0 {
                    return Err(SampleError::MomentsUnavailable("gaussian with non-zero mean".into()));
                }
                p * sd.ln() + ln_abs_gauss(p)
            }
            DistSpec::Rademacher => 0.0,
            DistSpec::UniformBounded { a, b } => {
                let prim = |x: f64| x.signum() * x.abs().powf(p + 1.0) / (p + 1.0);
                ((prim(*b) - prim(*a)) / (b - a)).ln()
            }
            DistSpec::Exponential { lambda, centered } => {
                let base = if *centered {
                    // E|E − 1|^p = e^{−1}(Γ(p+1) + ∫₀¹ uᵖ eᵘ du)
                    let mut series = 0.0;
                    let mut fact = 1.0;
                    for k in 0..60 {
                        if k > 0 {
                            fact *= k as f64;
                        }
                        series += 1.0 / (fact * (p + k as f64 + 1.0));
                    }
                    let lg = ln_gamma(p + 1.0);
                    -1.0 + lg + (1.0 + series * (-lg).exp()).ln()
                } else {
                    ln_gamma(p + 1.0)
                };
                base - p * lambda.ln()
            }
            DistSpec::ChiSquare { k } => {
                p * std::f64::consts::LN_2 + ln_gamma(k / 2.0 + p) - ln_gamma(k / 2.0)
            }
            DistSpec::ProductOfGaussians => 2.0 * ln_abs_gauss(p),
            DistSpec::DiscreteAtoms { values, probs } => {
                let s: f64 = values
                    .iter()
                    .zip(probs)
                    .filter(|(v, _)| **v != 0.0)
                    .map(|(v, q)| q * v.abs().powf(p))
                    .sum();
                s.ln()
            }
            DistSpec::IsotropicGaussianVector { .. } => {
                return Err(SampleError::MomentsUnavailable("vector family".into()))
            }
            DistSpec::ScaledToUnitPsi { base, scale, .. } => base.log_abs_moment(p)? - p * scale.ln(),
        })
    }
}

/// `count` draws under `seed`; draw `i` uses substream `i`.
pub fn sample(spec: &DistSpec, count: usize, seed: u64) -> Result<Batch, SampleError> {
    spec.validate()?;
    if count == 0 {
        return Err(SampleError::BadSpec("count must be at least 1".into()));
    }
    let t = rng::tag("sample");
    Ok(if spec.is_vector() {
        Batch::Vectors((0..count).map(|i| spec.draw_vector(&mut rng::substream(seed, t, i as u64))).collect())
    } else {
        Batch::Scalars((0..count).map(|i| spec.draw(&mut rng::substream(seed, t, i as u64))).collect())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiMethod {
    ClosedForm,
    MomentFormulaSupremum { p_min: f64, p_max: f64, points: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiNormRecord {
    pub alpha: f64,
    pub value: f64,
    /// Order `p` attaining the grid supremum.
    pub argmax_p: f64,
    pub method: PsiMethod,
}

pub const PSI_P_MAX: f64 = 200.0;
pub const PSI_GRID_POINTS: usize = 400;

/// `sup_p p^{−1/α}(E|X|^p)^{1/p}` over a geometric grid of `points` orders in `[1, p_max]`.
pub fn psi_norm_on_grid(
    spec: &DistSpec,
    alpha: f64,
    p_max: f64,
    points: usize,
) -> Result<PsiNormRecord, SampleError> {
    spec.validate()?;
    if !(alpha >= 1.0) {
        return Err(SampleError::BadSpec(format!("alpha must be >= 1, got {alpha}")));
    }
    let mut best = (f64::NEG_INFINITY, 1.0);
    for i in 0..points {
        let p = p_max.powf(i as f64 / (points - 1) as f64);
        let v = spec.log_abs_moment(p)? / p - p.ln() / alpha;
        if v > best.0 {
            best = (v, p);
        }
    }
    let method = if *spec == DistSpec::Rademacher {
        PsiMethod::ClosedForm
    } else {
        PsiMethod::MomentFormulaSupremum { p_min: 1.0, p_max, points }
    };
    Ok(PsiNormRecord { alpha, value: best.0.exp(), argmax_p: best.1, method })
}

pub fn psi_norm(spec: &DistSpec, alpha: f64) -> Result<PsiNormRecord, SampleError> {
    psi_norm_on_grid(spec, alpha, PSI_P_MAX, PSI_GRID_POINTS)
}

/// Wrap `spec` so its ψα-norm is one.
pub fn scale_to_unit_psi(spec: &DistSpec, alpha: f64) -> Result<DistSpec, SampleError> {
    let rec = psi_norm(spec, alpha)?;
    if !(rec.value > 0.0) {
        return Err(SampleError::ZeroNorm);
    }
    Ok(DistSpec::ScaledToUnitPsi { base: Box::new(spec.clone()), alpha, scale: rec.value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_draws() {
        let spec = DistSpec::DiscreteAtoms { values: vec![0.0], probs: vec![1.0] };
        assert_eq!(sample(&spec, 5, 1).unwrap(), Batch::Scalars(vec![0.0; 5]));
        assert_eq!(psi_norm(&spec, 2.0).unwrap().value, 0.0);
        assert_eq!(scale_to_unit_psi(&spec, 2.0), Err(SampleError::ZeroNorm));
    }

    #[test]
    fn rademacher_signs_and_norm() {
        let Batch::Scalars(v) = sample(&DistSpec::Rademacher, 1000, 3).unwrap() else { panic!() };
        assert!(v.iter().all(|x| *x == 1.0 || *x == -1.0));
        let r = psi_norm(&DistSpec::Rademacher, 2.0).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.method, PsiMethod::ClosedForm);
    }

    #[test]
    fn reproducible() {
        let s = DistSpec::Gaussian { mean: 0.0, sd: 2.0 };
        assert_eq!(sample(&s, 100, 9).unwrap(), sample(&s, 100, 9).unwrap());
        assert_ne!(sample(&s, 100, 9).unwrap(), sample(&s, 100, 10).unwrap());
    }

    #[test]
    fn exponential_moments_are_factorials() {
        let s = DistSpec::Exponential { lambda: 1.0, centered: false };
        for k in 1..8 {
            let fact: f64 = (1..=k).map(|i| i as f64).product();
            assert!((s.log_abs_moment(k as f64).unwrap() - fact.ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn centered_exponential_moment_two_is_variance() {
        let s = DistSpec::Exponential { lambda: 2.0, centered: true };
        assert!((s.log_abs_moment(2.0).unwrap().exp() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn bad_specs() {
        assert!(sample(&DistSpec::Gaussian { mean: 0.0, sd: -1.0 }, 1, 0).is_err());
        let s = DistSpec::DiscreteAtoms { values: vec![1.0, 2.0], probs: vec![0.5, 0.6] };
        assert!(matches!(sample(&s, 1, 0), Err(SampleError::BadSpec(_))));
    }
}
