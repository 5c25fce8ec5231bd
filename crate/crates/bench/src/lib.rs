//! Fixtures shared by the benchmarks.

use tailcert::catalog::gaussian_mean_cert;
use tailcert::rng::Rng;
use tailcert::samplers::DistSpec;
use tailcert::{RateSequence, TailCertificate};
use tailcert_cli::oracle::GradientOracle;
use tailcert_cli::scenarios::Design;

pub fn gaussian_mean() -> TailCertificate {
    gaussian_mean_cert(&RateSequence::LogN(1.0)).expect("catalog certificate")
}

/// Design of `n` rows in `R^d` with unit ψ₂ rows, and the matching oracle.
pub fn gradient_fixture(d: usize, n: usize, rng: &mut Rng) -> (Design, GradientOracle) {
    let tau = 1.0 / (2.0 / std::f64::consts::PI).sqrt();
    let spec = DistSpec::ScaledToUnitPsi {
        base: Box::new(DistSpec::IsotropicGaussianVector { d }),
        alpha: 2.0,
        scale: 1.0 / tau,
    };
    (Design::draw(&spec, d, n, rng), GradientOracle::new(tau))
}
