//! Deterministic oracles: Gauss–Hermite quadrature, the logistic loss and
//! symmetric eigenvalues.

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights with `Σ wᵢ h(xᵢ) ≈ E h(Z)` for `Z ~ N(0, 1)` (Golub–Welsch).
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(order: usize) -> Self {
        let mut j = DMatrix::<f64>::zeros(order, order);
        for k in 1..order {
            let b = (k as f64).sqrt();
            j[(k - 1, k)] = b;
            j[(k, k - 1)] = b;
        }
        let eig = SymmetricEigen::new(j);
        let mut pairs: Vec<(f64, f64)> = (0..order)
            .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        GaussHermite { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() }
    }

    pub fn expect(&self, h: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * h(*x)).sum()
    }
}

/// `ℓ(x) = log(1 + eˣ)`.
pub fn logistic_loss(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `ℓ′ = σ`.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ℓ″ = σ(1 − σ)`.
pub fn sigmoid_prime(x: f64) -> f64 {
    let s = sigmoid(x);
    s * (1.0 - s)
}

/// `ℓ‴ = σ′(1 − 2σ)`.
pub fn sigmoid_second(x: f64) -> f64 {
    let s = sigmoid(x);
    s * (1.0 - s) * (1.0 - 2.0 * s)
}

/// Population gradient and Hessian of `L(θ) = E ℓ(θᵀX)` for `X ~ N(0, τ²I)`.
///
/// Stein's identity gives `∇L(θ) = τ²θ·g(‖θ‖)` with `g(ρ) = E σ′(τρZ)`, and
/// `∇²L(θ) = τ²(g(ρ)I + g′(ρ)θθᵀ/ρ)` with `g′(ρ) = τ E[Z σ″(τρZ)]`.
#[derive(Debug, Clone)]
pub struct GradientOracle {
    pub tau: f64,
    rule: GaussHermite,
    check: GaussHermite,
}

impl GradientOracle {
    pub fn new(tau: f64) -> Self {
        GradientOracle { tau, rule: GaussHermite::new(96), check: GaussHermite::new(144) }
    }

    fn g(&self, rule: &GaussHermite, rho: f64) -> (f64, f64) {
        let a = self.tau * rho;
        (rule.expect(|z| sigmoid_prime(a * z)), self.tau * rule.expect(|z| z * sigmoid_second(a * z)))
    }

    /// `(g(ρ), g′(ρ))`.
    pub fn radial(&self, rho: f64) -> (f64, f64) {
        self.g(&self.rule, rho)
    }

    /// Largest disagreement between the two quadrature orders over `ρ ∈ [0, radius]`.
    pub fn quadrature_error(&self, radius: f64) -> f64 {
        (0..=64)
            .map(|i| {
                let rho = radius * i as f64 / 64.0;
                let (a, b) = (self.g(&self.rule, rho), self.g(&self.check, rho));
                (a.0 - b.0).abs().max((a.1 - b.1).abs())
            })
            .fold(0.0, f64::max)
    }

    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let (g, _) = self.radial(norm(theta));
        theta.iter().map(|t| self.tau * self.tau * g * t).collect()
    }

    /// `∇²L(θ)·v`.
    pub fn hessian_apply(&self, theta: &[f64], v: &[f64]) -> Vec<f64> {
        let rho = norm(theta);
        let (g, gp) = self.radial(rho);
        let tt = self.tau * self.tau;
        let proj = if rho > 0.0 { gp * dot(theta, v) / rho } else { 0.0 };
        theta.iter().zip(v).map(|(t, vi)| tt * (g * vi + proj * t)).collect()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Eigenvalues of a dense symmetric matrix.
pub fn symmetric_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    SymmetricEigen::new(m).eigenvalues.iter().copied().collect()
}

/// `max |λᵢ|`.
pub fn spectral_norm_symmetric(m: DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(m).into_iter().map(f64::abs).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_moments() {
        let gh = GaussHermite::new(40);
        assert!((gh.expect(|_| 1.0) - 1.0).abs() < 1e-13);
        assert!((gh.expect(|z| z * z) - 1.0).abs() < 1e-12);
        assert!((gh.expect(|z| z.powi(4)) - 3.0).abs() < 1e-11);
        assert!(gh.expect(|z| z.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn logistic_derivatives() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(sigmoid_prime(0.0), 0.25);
        let h = 1e-5;
        for x in [-3.0, -0.2, 0.7, 4.0] {
            assert!(((logistic_loss(x + h) - logistic_loss(x - h)) / (2.0 * h) - sigmoid(x)).abs() < 1e-9);
            assert!(((sigmoid_prime(x + h) - sigmoid_prime(x - h)) / (2.0 * h) - sigmoid_second(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn gradient_matches_finite_differences_of_the_loss() {
        // L(θ) = E ℓ(τρZ) is radial; compare ∇L with a central difference of GH(ℓ)
        let o = GradientOracle::new(1.3);
        let gh = GaussHermite::new(120);
        let big_l = |th: &[f64]| gh.expect(|z| logistic_loss(1.3 * norm(th) * z));
        let theta = [0.4, -0.3, 0.5];
        let g = o.gradient(&theta);
        for i in 0..3 {
            let (mut a, mut b) = (theta, theta);
            a[i] += 1e-5;
            b[i] -= 1e-5;
            assert!(((big_l(&a) - big_l(&b)) / 2e-5 - g[i]).abs() < 1e-7);
        }
        assert!(o.quadrature_error(1.0) < 1e-12);
    }

    #[test]
    fn hessian_matches_finite_differences_of_the_gradient() {
        let o = GradientOracle::new(1.2);
        let theta = [0.3, 0.6];
        let v = [0.2, -1.0];
        let hv = o.hessian_apply(&theta, &v);
        let h = 1e-6;
        let plus: Vec<f64> = theta.iter().zip(&v).map(|(t, vi)| t + h * vi).collect();
        let minus: Vec<f64> = theta.iter().zip(&v).map(|(t, vi)| t - h * vi).collect();
        let (gp, gm) = (o.gradient(&plus), o.gradient(&minus));
        for i in 0..2 {
            assert!(((gp[i] - gm[i]) / (2.0 * h) - hv[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn diagonal_spectral_norm() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!((spectral_norm_symmetric(m) - 1.0).abs() < 1e-15);
    }
}
