//! Closed-form distribution functions used as oracles and the exact binomial
//! upper confidence limit.

use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::beta::beta_reg;
use libm::erfc;
pub use statrs::function::gamma::ln_gamma;

/// `P(Z ≥ x)` for a standard normal `Z`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// `P(|Z| ≥ x)` for a standard normal `Z`, `x ≥ 0`.
pub fn normal_two_sided_sf(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        erfc(x / std::f64::consts::SQRT_2)
    }
}

/// `P(χ²_k ≥ x)`.
pub fn chi_square_sf(k: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(k).map(|d| d.sf(x)).unwrap_or(f64::NAN)
}

/// `P(Bin(m, p) ≤ k)`.
pub fn binomial_cdf(k: u64, m: u64, p: f64) -> f64 {
    if k >= m || p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return 0.0;
    }
    1.0 - beta_reg((k + 1) as f64, (m - k) as f64, p)
}

/// Clopper–Pearson upper limit: the `p` with `P(Bin(m, p) ≤ k) = δ`.
///
/// For `k = 0` this is `1 − δ^(1/m)`; otherwise it is found by bisection on
/// the regularized incomplete beta function.
pub fn clopper_pearson_upper(k: u64, m: u64, delta: f64) -> f64 {
    assert!(m >= 1 && k <= m, "need 0 <= k <= m, m >= 1");
    assert!(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
    if k == m {
        return 1.0;
    }
    if k == 0 {
        return -f64::exp_m1(delta.ln() / m as f64);
    }
    let (mut lo, mut hi) = (k as f64 / m as f64, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binomial_cdf(k, m, mid) > delta {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    // hi always satisfies cdf ≤ δ, so it is the conservative end.
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_values() {
        let v = normal_two_sided_sf(2.0);
        assert!((v - 0.045500263896358).abs() < 1e-12, "{v}");
        assert!((normal_sf(0.0) - 0.5).abs() < 1e-15);
        for x in [0.5, 1.0, 3.0, 8.0] {
            assert!(normal_sf(x) <= 0.5 * (-x * x / 2.0).exp());
        }
    }

    #[test]
    fn chi_square_values() {
        // P(χ²₂ ≥ x) = e^{−x/2}
        for x in [0.5, 2.0, 10.0] {
            assert!((chi_square_sf(2.0, x) - (-x / 2.0).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn cp_zero_exceedances() {
        let u = clopper_pearson_upper(0, 1000, 0.01);
        assert!((u - (1.0 - 0.01f64.powf(1e-3))).abs() < 1e-15);
    }

    #[test]
    fn cp_solves_tail_equation() {
        for &(k, m) in &[(1u64, 10u64), (5, 100), (500, 1000), (37, 1_000_000)] {
            let u = clopper_pearson_upper(k, m, 0.01);
            assert!(u >= k as f64 / m as f64);
            assert!((binomial_cdf(k, m, u) - 0.01).abs() < 1e-9);
        }
        assert_eq!(clopper_pearson_upper(10, 10, 0.05), 1.0);
    }

    #[test]
    fn cp_matches_brute_force_sum() {
        // direct binomial sum at m = 20
        let m = 20u64;
        let k = 3u64;
        let u = clopper_pearson_upper(k, m, 0.05);
        let mut cdf = 0.0;
        let mut coef = 1.0f64;
        for i in 0..=k {
            if i > 0 {
                coef *= (m - i + 1) as f64 / i as f64;
            }
            cdf += coef * u.powi(i as i32) * (1.0 - u).powi((m - i) as i32);
        }
        assert!((cdf - 0.05).abs() < 1e-10);
    }
}
